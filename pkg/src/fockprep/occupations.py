"""Initial-state level occupations: zero-temperature filling and Fermi-Dirac.

Occupation weights are attached to the bound levels of the initial trap
only; thermal population of scattering states is neglected.  That neglect
is sound while k_B*T is small compared to the gap from the topmost bound
level to threshold; a warning is emitted once the topmost bound level
carries weight above 1e-3.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .exceptions import NumericsError
from .solver import BoundSpectrum

MU_TOLERANCE = 1e-12  # particle-number mismatch allowed when solving mu
CONTINUUM_WEIGHT_WARN = 1e-3


@dataclass(frozen=True)
class OccupationState:
    """Per-level weights of the initial trap.

    weights[n] is the occupation probability of bound level n (0-based),
    each in [0, 1] and non-increasing, with sum equal to particle_number.
    temperature is k_B*T in energy units; 0 for a ground state, in which
    case chemical_potential is None.
    """

    weights: np.ndarray
    particle_number: float
    temperature: float
    chemical_potential: float | None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < -1e-12) or np.any(w > 1.0 + 1e-12):
            raise NumericsError("occupation weights must lie in [0, 1]")
        if abs(w.sum() - self.particle_number) > 1e-9 * max(1.0, self.particle_number):
            raise NumericsError("occupation weights do not sum to the particle number")


def ground_state_occupation(n_particles: int, spectrum: BoundSpectrum) -> OccupationState:
    """Step filling of the lowest n_particles levels."""
    n_float = float(n_particles)
    if n_float != int(n_float):
        raise ValueError(f"particle number must be an integer at T = 0, got {n_particles}")
    n = int(n_float)
    if not 1 <= n <= spectrum.capacity:
        raise ValueError(
            f"need 1 <= N <= capacity ({spectrum.capacity}), got {n}")
    weights = np.zeros(spectrum.capacity)
    weights[:n] = 1.0
    return OccupationState(weights, float(n), 0.0, None)


def fermi_dirac_weights(energies: np.ndarray, mu: float, temperature: float) -> np.ndarray:
    """1/(exp((E - mu)/kT) + 1), evaluated overflow-free."""
    return expit((mu - np.asarray(energies, dtype=float)) / temperature)


def solve_chemical_potential(energies: np.ndarray, n_particles: float,
                             temperature: float) -> float:
    """Bisect for mu with sum of Fermi-Dirac weights = n_particles.

    The weight sum is strictly increasing in mu, so the root is unique.
    """
    energies = np.asarray(energies, dtype=float)
    if temperature <= 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    if not 0 < n_particles < len(energies):
        raise NumericsError(
            f"thermal particle number must satisfy 0 < N < capacity "
            f"({len(energies)}); each level holds strictly less than one "
            f"particle at T > 0, got N = {n_particles}")
    lo = float(energies.min()) - 50.0 * temperature
    hi = 50.0 * temperature
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        total = float(fermi_dirac_weights(energies, mid, temperature).sum())
        if total > n_particles:
            hi = mid
        else:
            lo = mid
        if hi - lo <= max(1e-15, 1e-15 * abs(mid)):
            break
    mu = 0.5 * (lo + hi)
    total = float(fermi_dirac_weights(energies, mu, temperature).sum())
    if abs(total - n_particles) > MU_TOLERANCE * max(1.0, n_particles):
        raise NumericsError(
            f"chemical potential bisection left a particle-number mismatch of "
            f"{abs(total - n_particles):.2e}")
    return mu


def thermal_occupation(spectrum: BoundSpectrum, temperature: float,
                       n_particles: float) -> OccupationState:
    """Fermi-Dirac occupation of the bound levels at k_B*T = temperature."""
    mu = solve_chemical_potential(spectrum.energies, n_particles, temperature)
    weights = fermi_dirac_weights(spectrum.energies, mu, temperature)
    if weights[-1] > CONTINUUM_WEIGHT_WARN:
        warnings.warn(
            f"topmost bound level carries weight {weights[-1]:.3g}; neglected "
            f"scattering-state occupation may not be negligible",
            RuntimeWarning, stacklevel=2)
    return OccupationState(weights, float(n_particles), float(temperature), mu)


def density_profile(spectrum: BoundSpectrum, occupation: OccupationState) -> np.ndarray:
    """Particle density rho(x) = sum_n w_n |phi_n(x)|^2 as an (n, 2) array."""
    if len(occupation.weights) != spectrum.capacity:
        raise NumericsError(
            f"occupation has {len(occupation.weights)} weights for "
            f"{spectrum.capacity} levels")
    rho = np.einsum("j,ij->i", occupation.weights, spectrum.eigenfunctions**2)
    return np.column_stack([spectrum.grid.points(), rho])


def tonks_ratio(gamma_initial: float, density_initial: float, density_final: float) -> float:
    """Interaction parameter after a density change: gamma_i * n_i / n_f."""
    if gamma_initial <= 0 or density_initial <= 0 or density_final <= 0:
        raise ValueError("tonks_ratio requires positive inputs")
    return gamma_initial * density_initial / density_final
