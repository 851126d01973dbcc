"""Scenario runner: sudden trap reduction, parameter sweeps, figure suites.

A reduction scenario pairs an initial trap (holding the atoms) with a final
trap of smaller capacity; the sudden change projects the occupied levels
onto the final bound subspace and the counting statistics of the remaining
atoms follow from the kernel matrix.

Both traps are always solved on one shared grid (union of the per-trap
policy grids) and each bound set is truncated to the trap's pinned
capacity, so results do not depend on which companion trap inflated the
box.  In sweeps, one grid serves every row and the initial trap is solved
once.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import counting, occupations, solver
from .exceptions import ConfigError, NumericsError
from .occupations import OccupationState
from .solver import DEFAULT_POLICY, BoundSpectrum, GridPolicy
from .traps import Grid, TrapShape, TrapSpec, dimensionless_depth, family_member

FOCK_EPSILON = 1e-3

PI2 = math.pi**2

# canned figure-suite parameters (bathtub families labeled by capacity,
# sweep axes, and the temperature ladder), shared by the CLI
PANEL_RATIOS = {"a": 0.04, "b": 0.5, "c": 1.0}
SWEEP_RATIOS = tuple(np.round(np.arange(0.25, 1.0001, 0.05), 10))
TEMPERATURE_RATIOS = tuple(np.round(np.arange(0.30, 0.8001, 0.05), 10))
MU_OVER_KT_LADDER = (20.0, 10.0, 7.0, 5.0, 4.0)


@dataclass(frozen=True)
class OccupationSpec:
    """How the initial trap is populated.

    kind "ground": the lowest n_particles levels are filled.
    kind "thermal": Fermi-Dirac weights; give either the temperature k_B*T
    (energy units) or mu_over_kT, the chemical potential measured from the
    bottom of the initial well in units of k_B*T, from which the
    temperature is solved on the initial trap's own spectrum.
    """

    kind: str
    n_particles: float
    temperature: float | None = None
    mu_over_kT: float | None = None

    def __post_init__(self):
        if self.kind not in ("ground", "thermal"):
            raise ConfigError(f"occupation kind must be 'ground' or 'thermal', got {self.kind!r}")
        if self.kind == "ground":
            if self.temperature not in (None, 0.0) or self.mu_over_kT is not None:
                raise ConfigError("ground occupation takes no temperature")
        else:
            given = (self.temperature is not None) + (self.mu_over_kT is not None)
            if given != 1:
                raise ConfigError(
                    "thermal occupation needs exactly one of temperature, mu_over_kT")
            if self.temperature is not None and self.temperature <= 0:
                raise ConfigError("temperature must be positive")


@dataclass(frozen=True)
class ReductionScenario:
    initial: TrapSpec
    final: TrapSpec
    occupation: OccupationSpec


@dataclass(frozen=True)
class ScenarioResult:
    statistics: counting.CountingStatistics
    kernel: counting.KernelMatrix
    overlap: counting.OverlapMatrix
    initial_spectrum: BoundSpectrum
    final_spectrum: BoundSpectrum
    occupation: OccupationState
    grid: Grid
    min_eigenvalue: float
    fock_satisfied: bool

    @property
    def mean(self) -> float:
        return self.statistics.mean

    @property
    def variance(self) -> float:
        return self.statistics.variance

    @property
    def p_full(self) -> float:
        """Probability that the final trap is completely filled."""
        return float(self.statistics.probabilities[-1])


@dataclass(frozen=True)
class SweepRow:
    value: float
    mean: float
    variance: float
    min_eigenvalue: float
    p_full: float


@dataclass(frozen=True)
class SweepResult:
    parameter: str
    rows: tuple[SweepRow, ...]
    metadata: dict = field(compare=False)


@lru_cache(maxsize=512)
def _own_energies(shape: TrapShape, u: float, sigma_tilde: float,
                  margin: float, min_points: int) -> tuple[float, ...]:
    spec = solver._unit_member(shape, u, sigma_tilde)
    policy = GridPolicy(margin, min_points)
    return tuple(solver.solve_trap(spec, policy=policy).energies)


def _own_grid_energies(spec: TrapSpec, policy: GridPolicy) -> np.ndarray:
    """Bound energies on the trap's own grid, in physical units."""
    scaled = _own_energies(spec.shape, dimensionless_depth(spec), spec.sigma_tilde,
                           policy.margin_decay_lengths, policy.min_points)
    return np.asarray(scaled) / spec.half_width**2


def solve_temperature(spec: TrapSpec, n_particles: float, mu_over_kT: float,
                      policy: GridPolicy = DEFAULT_POLICY) -> float:
    """Temperature at which the well-bottom-referenced chemical potential
    equals mu_over_kT times k_B*T for the given filling of `spec`.

    (mu + V)/kT decreases monotonically from +inf (T -> 0, where mu + V is
    the Fermi energy above the bottom) toward log(N/(C - N)), so bisection
    on the temperature is safe whenever the target exceeds that limit.
    """
    energies = _own_grid_energies(spec, policy)
    depth = spec.depth

    def ratio(k_t):
        mu = occupations.solve_chemical_potential(energies, n_particles, k_t)
        return (mu + depth) / k_t

    lo, hi = 1e-7 * depth, 1e3 * depth
    if ratio(hi) >= mu_over_kT:
        raise NumericsError(
            f"mu_over_kT = {mu_over_kT} is below the high-temperature limit "
            f"for this filling; no temperature solves it")
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if ratio(mid) > mu_over_kT:
            lo = mid
        else:
            hi = mid
        if hi / lo < 1.0 + 1e-12:
            break
    return math.sqrt(lo * hi)


def _build_occupation(occ: OccupationSpec, spectrum: BoundSpectrum,
                      temperature: float | None) -> OccupationState:
    if occ.kind == "ground":
        return occupations.ground_state_occupation(int(occ.n_particles), spectrum)
    return occupations.thermal_occupation(spectrum, temperature, occ.n_particles)


def _resolve_temperature(scenario: ReductionScenario, policy: GridPolicy) -> float | None:
    occ = scenario.occupation
    if occ.kind == "ground":
        return None
    if occ.temperature is not None:
        return occ.temperature
    return solve_temperature(scenario.initial, occ.n_particles, occ.mu_over_kT, policy)


def _counting_pass(initial_spectrum: BoundSpectrum, final_spectrum: BoundSpectrum,
                   occupation: OccupationState, fock_epsilon: float):
    s = counting.overlap_matrix(initial_spectrum, final_spectrum)
    b = counting.kernel_matrix(s, occupation)
    stats = counting.number_distribution(b)
    min_eig, ok = counting.fock_condition(b, fock_epsilon)
    return s, b, stats, min_eig, ok


def run_scenario(scenario: ReductionScenario,
                 policy: GridPolicy = DEFAULT_POLICY,
                 fock_epsilon: float = FOCK_EPSILON,
                 grid: Grid | None = None) -> ScenarioResult:
    """Solve both traps on a shared grid and compute the full statistics."""
    cap_i = solver.capacity(scenario.initial, policy=policy)
    cap_f = solver.capacity(scenario.final, policy=policy)
    if cap_f > cap_i:
        warnings.warn(
            f"final capacity {cap_f} exceeds initial capacity {cap_i}; "
            f"this is not a trap reduction", RuntimeWarning, stacklevel=2)
    if grid is None:
        grid = solver.common_grid([scenario.initial, scenario.final], policy)
    spec_i = solver.solve_trap_pinned(scenario.initial, grid, policy)
    spec_f = solver.solve_trap_pinned(scenario.final, grid, policy)
    temperature = _resolve_temperature(scenario, policy)
    occupation = _build_occupation(scenario.occupation, spec_i, temperature)
    s, b, stats, min_eig, ok = _counting_pass(spec_i, spec_f, occupation, fock_epsilon)
    return ScenarioResult(stats, b, s, spec_i, spec_f, occupation, grid, min_eig, ok)


def sweep_width_ratio(base: ReductionScenario, ratios,
                      policy: GridPolicy = DEFAULT_POLICY,
                      fock_epsilon: float = FOCK_EPSILON,
                      threads: int = 1) -> SweepResult:
    """Re-run the scenario with the final half-width swept as ratio * L_i.

    All rows share one grid (union over the initial trap and every swept
    final trap); the initial trap is solved once.  Rows are ordered by the
    given ratios and are deterministic for fixed inputs.
    """
    ratios = [float(r) for r in ratios]
    if any(not 0.0 < r for r in ratios):
        raise ConfigError("width ratios must be positive")
    u_f = dimensionless_depth(base.final)
    st_f = base.final.sigma_tilde
    finals = [family_member(u_f, st_f, r * base.initial.half_width, base.final.shape)
              for r in ratios]
    grid = solver.common_grid([base.initial] + finals, policy)
    spec_i = solver.solve_trap_pinned(base.initial, grid, policy)
    temperature = _resolve_temperature(base, policy)
    occupation = _build_occupation(base.occupation, spec_i, temperature)

    def one(final_spec):
        spec_f = solver.solve_trap_pinned(final_spec, grid, policy)
        _, _, stats, min_eig, _ = _counting_pass(spec_i, spec_f, occupation, fock_epsilon)
        return stats, min_eig

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(one, finals))
    else:
        outcomes = [one(f) for f in finals]
    rows = tuple(
        SweepRow(r, st.mean, st.variance, mi, float(st.probabilities[-1]))
        for r, (st, mi) in zip(ratios, outcomes)
    )
    meta = {
        "initial": base.initial.to_dict(),
        "final_family": {"U": u_f, "sigma_tilde": st_f, "shape": base.final.shape.value},
        "occupation": {
            "kind": base.occupation.kind,
            "n_particles": base.occupation.n_particles,
            "temperature": temperature,
            "mu": occupation.chemical_potential,
        },
        "grid": {"x_max": grid.x_max, "n_points": grid.n_points},
        "capacity_initial": spec_i.capacity,
        "capacity_final": solver.capacity(finals[0], policy=policy),
    }
    return SweepResult("width_ratio", rows, meta)


def capacity_vs_smoothness(depth: float, half_width: float, sigma_list,
                           policy: GridPolicy = DEFAULT_POLICY):
    """Capacity and top-of-spectrum level gap for a list of wall widths.

    Returns rows (sigma, capacity, gap between the two shallowest levels).
    """
    rows = []
    for sigma in sigma_list:
        shape = TrapShape.SQUARE_WELL if sigma == 0 else TrapShape.BATHTUB
        spec = TrapSpec(shape, depth, half_width, float(sigma))
        energies = _own_grid_energies(spec, policy)
        cap = len(energies)
        gap = float(energies[-1] - energies[-2]) if cap >= 2 else math.nan
        rows.append((float(sigma), cap, gap))
    return rows


def temperature_sweep(base: ReductionScenario, mu_over_kT_list, ratios=None,
                      policy: GridPolicy = DEFAULT_POLICY,
                      threads: int = 1) -> SweepResult:
    """One width-ratio sweep per temperature; the figure of merit per row is
    the plateau mean, the maximum of the mean over the swept ratios."""
    if base.occupation.kind != "thermal":
        raise ConfigError("temperature_sweep needs a thermal base occupation")
    if ratios is None:
        ratios = TEMPERATURE_RATIOS
    rows = []
    details = []
    for rho in mu_over_kT_list:
        k_t = solve_temperature(base.initial, base.occupation.n_particles, float(rho), policy)
        occ = OccupationSpec("thermal", base.occupation.n_particles, temperature=k_t)
        sweep = sweep_width_ratio(
            ReductionScenario(base.initial, base.final, occ), ratios, policy,
            threads=threads)
        best = max(sweep.rows, key=lambda row: row.mean)
        rows.append(SweepRow(float(rho), best.mean, best.variance,
                             best.min_eigenvalue, best.p_full))
        details.append({"mu_over_kT": float(rho), "temperature": k_t, "sweep": sweep})
    meta = {
        "initial": base.initial.to_dict(),
        "final_family": {"U": dimensionless_depth(base.final),
                         "sigma_tilde": base.final.sigma_tilde,
                         "shape": base.final.shape.value},
        "n_particles": base.occupation.n_particles,
        "ratios": [float(r) for r in ratios],
        "details": details,
    }
    return SweepResult("mu_over_kT", tuple(rows), meta)


def recipe(u_initial: float, u_final: float, initial: TrapSpec) -> TrapSpec:
    """Final trap of the halved-width prescription.

    The final half-width is L_i/2 and the depth is solved exactly from the
    dimensionless-depth convention at that width (never from an approximate
    depth-ratio shortcut), keeping the relative smoothness unchanged.
    """
    if not u_final < u_initial:
        raise ConfigError(
            f"recipe needs U_final < U_initial, got {u_final} >= {u_initial}")
    return family_member(u_final, initial.sigma_tilde, initial.half_width / 2.0,
                         initial.shape)


# ---------------------------------------------------------------------------
# canned figure suites


def fock_distribution_panels(policy: GridPolicy = DEFAULT_POLICY) -> dict:
    """Three distributions: near-pure squeezing, mixed reduction, weakening.

    Bathtub, sigma/L = 0.03, U_i = 1e4 pi^2 -> U_f = 1e2 pi^2, 100 atoms.
    """
    out = {}
    for label, ratio in PANEL_RATIOS.items():
        initial = family_member(1e4 * PI2, 0.03, 1.0, TrapShape.BATHTUB)
        final = family_member(1e2 * PI2, 0.03, ratio, TrapShape.BATHTUB)
        occ = OccupationSpec("ground", 100)
        out[label] = run_scenario(ReductionScenario(initial, final, occ), policy)
    return out


def smoothness_capacity_table(policy: GridPolicy = DEFAULT_POLICY):
    """Capacity growth with wall smoothness at fixed depth (10 pi)^2/L^2."""
    return capacity_vs_smoothness((10 * math.pi) ** 2, 1.0, (0.05, 0.2, 0.5), policy)


def anchored_family_pair(shape: TrapShape, sigma_tilde: float,
                         cap_initial: int = 100, cap_final: int = 10,
                         policy: GridPolicy = DEFAULT_POLICY) -> tuple[float, float]:
    """Dimensionless depths holding exactly (cap_initial, cap_final) states.

    Smooth walls bind extra near-brim states, so hitting an exact capacity
    pair requires calibrating U per smoothness rather than reusing the
    square-well values (C pi)^2.
    """
    u_i = solver.calibrate_family_depth(shape, sigma_tilde, cap_initial, policy=policy)
    u_f = solver.calibrate_family_depth(shape, sigma_tilde, cap_final, policy=policy)
    return u_i, u_f


def robustness_sweeps(policy: GridPolicy = DEFAULT_POLICY, ratios=SWEEP_RATIOS,
                      threads: int = 1) -> dict:
    """Width-ratio sweeps showing the robustness plateau.

    Bathtub families at sigma/L in {0.01, 0.03, 0.1} with depths anchored to
    capacities (100, 10) and every level filled.  The Gaussian runs twice:
    at the nominal labels U_i = (28 pi)^2, U_f = (8 pi)^2, whose capacities
    come out (99, 28) under U = V * delta^2 (see README on the Gaussian
    convention), and at capacity-anchored depths for the (100, 10) pair.
    """
    out = {}
    for st in (0.01, 0.03, 0.1):
        u_i, u_f = anchored_family_pair(TrapShape.BATHTUB, st, policy=policy)
        initial = family_member(u_i, st, 1.0, TrapShape.BATHTUB)
        final = family_member(u_f, st, 0.5, TrapShape.BATHTUB)
        occ = OccupationSpec("ground", 100)
        out[f"bathtub_st{st:g}"] = sweep_width_ratio(
            ReductionScenario(initial, final, occ), ratios, policy, threads=threads)

    g_i = family_member((28 * math.pi) ** 2, 0.0, 1.0, TrapShape.INVERTED_GAUSSIAN)
    g_f = family_member((8 * math.pi) ** 2, 0.0, 0.5, TrapShape.INVERTED_GAUSSIAN)
    occ = OccupationSpec("ground", solver.capacity(g_i, policy=policy))
    out["gaussian_nominal"] = sweep_width_ratio(
        ReductionScenario(g_i, g_f, occ), ratios, policy, threads=threads)

    u_i, u_f = anchored_family_pair(TrapShape.INVERTED_GAUSSIAN, 0.0, policy=policy)
    a_i = family_member(u_i, 0.0, 1.0, TrapShape.INVERTED_GAUSSIAN)
    a_f = family_member(u_f, 0.0, 0.5, TrapShape.INVERTED_GAUSSIAN)
    occ = OccupationSpec("ground", 100)
    out["gaussian_anchored"] = sweep_width_ratio(
        ReductionScenario(a_i, a_f, occ), ratios, policy, threads=threads)
    return out


def temperature_degradation(policy: GridPolicy = DEFAULT_POLICY,
                            mu_over_kT_list=MU_OVER_KT_LADDER,
                            threads: int = 1) -> dict:
    """Thermal degradation of the plateau and its capacity compensation.

    Square wells, U_i = (100 pi)^2 filled with 80 atoms; per mu/kT value
    the plateau mean is reported, then the run at mu/kT = 5 is repeated at
    the same absolute temperature from a larger well, U_i = (130 pi)^2 with
    104 atoms (same 0.8 filling fraction).
    """
    initial = family_member(1e4 * PI2, 0.0, 1.0, TrapShape.SQUARE_WELL)
    final = family_member(1e2 * PI2, 0.0, 0.5, TrapShape.SQUARE_WELL)
    base = ReductionScenario(initial, final,
                             OccupationSpec("thermal", 80.0, mu_over_kT=5.0))
    ladder = temperature_sweep(base, mu_over_kT_list, policy=policy, threads=threads)

    k_t5 = solve_temperature(initial, 80.0, 5.0, policy)
    big = family_member((130 * math.pi) ** 2, 0.0, 1.0, TrapShape.SQUARE_WELL)
    recovery = sweep_width_ratio(
        ReductionScenario(big, final, OccupationSpec("thermal", 104.0, temperature=k_t5)),
        TEMPERATURE_RATIOS, policy, threads=threads)
    best = max(recovery.rows, key=lambda row: row.mean)
    return {
        "ladder": ladder,
        "temperature_at_5": k_t5,
        "recovery_sweep": recovery,
        "recovery_plateau_mean": best.mean,
    }
