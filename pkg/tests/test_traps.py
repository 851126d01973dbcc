import math

import numpy as np
import pytest

from fockprep import (
    TrapShape,
    TrapSpec,
    dimensionless_depth,
    evaluate_potential,
    family_member,
)
from fockprep.traps import Grid

PI2 = math.pi**2


def test_bathtub_half_depth_at_wall():
    spec = TrapSpec(TrapShape.BATHTUB, 7.0, 1.3, 0.05)
    assert evaluate_potential(spec, 1.3) == -3.5
    assert evaluate_potential(spec, -1.3) == -3.5


def test_gaussian_center_value():
    spec = TrapSpec(TrapShape.INVERTED_GAUSSIAN, 11.0, 2.0)
    assert evaluate_potential(spec, 0.0) == -11.0


def test_bathtub_flat_bottom():
    spec = TrapSpec(TrapShape.BATHTUB, 5.0, 1.0, 0.05)
    assert abs(evaluate_potential(spec, 0.0) + 5.0) < 1e-15 * 5.0


def test_square_well_values_and_wall_average():
    spec = TrapSpec(TrapShape.SQUARE_WELL, 4.0, 1.0)
    x = np.array([0.0, 0.5, 1.0, 1.5, -1.0])
    np.testing.assert_allclose(evaluate_potential(spec, x),
                               [-4.0, -4.0, -2.0, 0.0, -2.0])


@pytest.mark.parametrize("spec", [
    TrapSpec(TrapShape.BATHTUB, 5.0, 1.0, 0.2),
    TrapSpec(TrapShape.SQUARE_WELL, 5.0, 1.0),
    TrapSpec(TrapShape.INVERTED_GAUSSIAN, 5.0, 1.0),
])
def test_parity_and_range(spec):
    x = np.linspace(-4, 4, 197)
    v = evaluate_potential(spec, x)
    np.testing.assert_array_equal(v, evaluate_potential(spec, -x))
    assert np.all(v <= 0.0) and np.all(v >= -spec.depth)


def test_monotone_smoothing():
    narrow = TrapSpec(TrapShape.BATHTUB, 5.0, 1.0, 0.05)
    wide = TrapSpec(TrapShape.BATHTUB, 5.0, 1.0, 0.3)
    inside = np.linspace(0.0, 0.999, 50)
    outside = np.linspace(1.001, 3.0, 50)
    assert np.all(evaluate_potential(wide, inside) > evaluate_potential(narrow, inside))
    assert np.all(evaluate_potential(wide, outside) < evaluate_potential(narrow, outside))


def test_dimensionless_depth_scaling_invariance():
    spec = TrapSpec(TrapShape.BATHTUB, 9.0, 0.75, 0.03)
    scaled = TrapSpec(TrapShape.BATHTUB, 4 * 9.0, 0.75 / 2, 0.03 / 2)
    assert dimensionless_depth(spec) == dimensionless_depth(scaled)
    for s in (1.7, 0.31, 12.0):
        other = TrapSpec(TrapShape.BATHTUB, s**2 * 9.0, 0.75 / s, 0.03 / s)
        assert dimensionless_depth(other) == pytest.approx(
            dimensionless_depth(spec), rel=1e-12)


def test_family_member_round_trip():
    for shape, st in [(TrapShape.BATHTUB, 0.03), (TrapShape.SQUARE_WELL, 0.0),
                      (TrapShape.INVERTED_GAUSSIAN, 0.0)]:
        spec = family_member(123.4, st, 0.9, shape)
        assert dimensionless_depth(spec) == pytest.approx(123.4, rel=1e-12)
        again = family_member(dimensionless_depth(spec), spec.sigma_tilde,
                              spec.half_width, spec.shape)
        assert again == spec


def test_family_member_routes_zero_smoothness_to_square():
    spec = family_member(100.0, 0.0, 1.0, TrapShape.BATHTUB)
    assert spec.shape is TrapShape.SQUARE_WELL


def test_gaussian_depth_inversion():
    u = (8 * math.pi) ** 2
    delta = 0.7
    spec = family_member(u, 0.0, delta, TrapShape.INVERTED_GAUSSIAN)
    assert spec.depth == pytest.approx(u / delta**2, rel=1e-14)


def test_validation_errors():
    with pytest.raises(ValueError):
        TrapSpec(TrapShape.SQUARE_WELL, -1.0, 1.0)
    with pytest.raises(ValueError):
        TrapSpec(TrapShape.BATHTUB, 1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        TrapSpec(TrapShape.SQUARE_WELL, 1.0, 1.0, 0.1)
    with pytest.raises(ValueError):
        family_member(-5.0, 0.0, 1.0, TrapShape.SQUARE_WELL)
    with pytest.raises(ValueError):
        family_member(5.0, 0.0, -1.0, TrapShape.SQUARE_WELL)


def test_serialization_round_trip():
    spec = TrapSpec(TrapShape.BATHTUB, 2.5, 1.5, 0.045)
    assert TrapSpec.from_dict(spec.to_dict()) == spec
    by_family = TrapSpec.from_dict(
        {"shape": "bathtub", "U": 100.0, "sigma_tilde": 0.03, "half_width": 0.5})
    assert dimensionless_depth(by_family) == pytest.approx(100.0, rel=1e-12)
    with pytest.raises(ValueError, match="unknown trap keys"):
        TrapSpec.from_dict({"shape": "bathtub", "depth": 1, "half_width": 1,
                            "smoothness": 0.1, "typo": 2})
    with pytest.raises(ValueError, match="missing required"):
        TrapSpec.from_dict({"shape": "square"})


def test_grid_basics():
    grid = Grid(-2.0, 2.0, 5)
    assert grid.spacing == 1.0
    np.testing.assert_allclose(grid.points(), [-2, -1, 0, 1, 2])
    with pytest.raises(ValueError):
        Grid(-1.0, 1.0, 2)
    with pytest.raises(ValueError):
        Grid(1.0, -1.0, 5)
