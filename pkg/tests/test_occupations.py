import math

import numpy as np
import pytest

from fockprep import (
    NumericsError,
    TrapShape,
    density_profile,
    family_member,
    ground_state_occupation,
    solve_trap,
    thermal_occupation,
    tonks_ratio,
)
from fockprep.occupations import solve_chemical_potential
from fockprep.solver import BoundSpectrum
from fockprep.traps import Grid

PI2 = math.pi**2

EXPIT_2 = 0.8807970779778823
EXPIT_M2 = 0.11920292202211755

# several tests intentionally occupy the topmost level; silence the
# continuum-neglect advisory except where it is under test
pytestmark = pytest.mark.filterwarnings(
    "ignore:topmost bound level carries weight")


def _fake_spectrum(energies):
    energies = np.asarray(energies, dtype=float)
    n = 11
    grid = Grid(-1.0, 1.0, n)
    phi = np.zeros((n, energies.size))
    phi[1: 1 + energies.size, :] = np.eye(energies.size) / math.sqrt(grid.spacing)
    return BoundSpectrum(energies, phi, grid, np.empty(0))


@pytest.fixture(scope="module")
def deep_spectrum():
    return solve_trap(family_member(4e2 * PI2, 0.0, 1.0, TrapShape.SQUARE_WELL))


def test_full_and_partial_step_filling(deep_spectrum):
    cap = deep_spectrum.capacity
    full = ground_state_occupation(cap, deep_spectrum)
    np.testing.assert_array_equal(full.weights, np.ones(cap))
    single = ground_state_occupation(1, deep_spectrum)
    assert single.weights[0] == 1.0 and single.weights[1:].sum() == 0.0
    partial = ground_state_occupation(int(0.8 * 20), deep_spectrum)
    assert partial.weights[:16].sum() == 16 and partial.weights[16:].sum() == 0


def test_step_filling_rejects_bad_counts(deep_spectrum):
    with pytest.raises(ValueError):
        ground_state_occupation(deep_spectrum.capacity + 1, deep_spectrum)
    with pytest.raises(ValueError):
        ground_state_occupation(0, deep_spectrum)


def test_two_level_thermal_is_symmetric():
    # half-filled two-level system: mu sits midway by symmetry and the
    # weights are logistic in (E - mu)/kT = -+ half the gap over kT
    spectrum = _fake_spectrum([-3.0, -1.0])
    occ = thermal_occupation(spectrum, 0.5, 1.0)
    assert occ.chemical_potential == pytest.approx(-2.0, abs=1e-9)
    np.testing.assert_allclose(occ.weights, [EXPIT_2, EXPIT_M2], rtol=1e-9)
    warm = thermal_occupation(spectrum, 1.0, 1.0)
    np.testing.assert_allclose(
        warm.weights, [1 / (1 + math.exp(-1.0)), 1 / (1 + math.exp(1.0))], rtol=1e-9)


def test_thermal_step_limit(deep_spectrum):
    n = 10
    gap = deep_spectrum.energies[n] - deep_spectrum.energies[n - 1]
    temperature = gap / 60.0  # beta * gap = 60 across the edge
    occ = thermal_occupation(deep_spectrum, temperature, float(n))
    step = ground_state_occupation(n, deep_spectrum)
    np.testing.assert_allclose(occ.weights, step.weights, atol=1e-6)


def test_normalization_and_monotonicity(deep_spectrum):
    for n_particles, kt in [(3.0, 50.0), (10.5, 300.0), (17.0, 1000.0)]:
        occ = thermal_occupation(deep_spectrum, kt, n_particles)
        assert abs(occ.weights.sum() - n_particles) < 1e-10
        assert np.all(np.diff(occ.weights) <= 1e-15)
    mus = [solve_chemical_potential(deep_spectrum.energies, n, 200.0)
           for n in (5.0, 10.0, 15.0)]
    assert mus[0] < mus[1] < mus[2]


def test_thermal_rejects_unreachable_filling(deep_spectrum):
    with pytest.raises(NumericsError):
        thermal_occupation(deep_spectrum, 10.0, float(deep_spectrum.capacity))
    with pytest.raises(ValueError):
        thermal_occupation(deep_spectrum, -1.0, 5.0)


def test_continuum_weight_warning():
    spectrum = _fake_spectrum([-10.0, -9.0, -8.0])
    with pytest.warns(RuntimeWarning, match="scattering-state"):
        thermal_occupation(spectrum, 50.0, 1.5)


def test_density_single_particle(deep_spectrum):
    occ = ground_state_occupation(1, deep_spectrum)
    rho = density_profile(deep_spectrum, occ)[:, 1]
    np.testing.assert_allclose(rho, deep_spectrum.eigenfunctions[:, 0] ** 2, rtol=1e-12)
    assert rho.argmax() == deep_spectrum.grid.n_points // 2  # single even hump


def test_density_integral_and_plateau(deep_spectrum):
    cap = deep_spectrum.capacity
    occ = ground_state_occupation(cap, deep_spectrum)
    profile = density_profile(deep_spectrum, occ)
    x, rho = profile[:, 0], profile[:, 1]
    dx = deep_spectrum.grid.spacing
    assert abs(rho.sum() * dx - cap) < 1e-8
    interior = rho[np.abs(x) < 0.75]
    assert interior.std() / interior.mean() < 0.05  # near-uniform plateau


def test_density_dimension_mismatch(deep_spectrum):
    occ = ground_state_occupation(2, _fake_spectrum([-3.0, -1.0]))
    with pytest.raises(NumericsError):
        density_profile(deep_spectrum, occ)


def test_tonks_ratio_rules():
    assert tonks_ratio(2.0, 1.3, 1.3) == 2.0
    assert tonks_ratio(2.0, 1.0, 0.5) == 4.0
    with pytest.raises(ValueError):
        tonks_ratio(-1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        tonks_ratio(1.0, 1.0, 0.0)


def test_tonks_ratio_from_density_profiles():
    initial = solve_trap(family_member(4e2 * PI2, 0.0, 1.0, TrapShape.SQUARE_WELL))
    final = solve_trap(family_member(1e2 * PI2, 0.0, 1.0, TrapShape.SQUARE_WELL))
    rho_i = density_profile(initial, ground_state_occupation(20, initial))[:, 1].max()
    rho_f = density_profile(final, ground_state_occupation(10, final))[:, 1].max()
    ratio = tonks_ratio(1.0, rho_i, rho_f)
    assert ratio == pytest.approx(rho_i / rho_f, rel=1e-12)
    assert ratio > 1.0  # weakening lowers the density, pushing deeper into TG
