"""Finite-difference bound-state solver for 1D traps.

The Hamiltonian is centrally differenced on a uniform Dirichlet grid and
the resulting symmetric tridiagonal matrix is diagonalized below threshold
only (Sturm bisection + inverse iteration, via the compiled kernel or the
scipy fallback).

Grid policy
-----------
Grids are derived in dimensionless units (lengths in units of the trap
half-width L), so every member of an isospectral family receives the exact
same dimensionless grid:

* spacing: min(sigma/8, lambda_min/16, L/200) with lambda_min = 2*pi/sqrt(V)
  the shortest de Broglie wavelength at the well bottom, snapped to an exact
  submultiple of L so that square-well walls fall on grid points;
* box: classical extent plus 10 decay lengths of the shallowest binding
  energy, the latter estimated once from a coarse two-resolution solve in
  which states that Richardson-extrapolate to E >= 0 (discretization-bound
  threshold artifacts) are ignored.

The box is sized for the states visible at the coarse-pass horizon; very
weakly bound states whose tails exceed that horizon are deliberately left
out of the trap's capacity.  This keeps the capacity a property of the
(shape, U, sigma/L) family, independent of how large a box any particular
scenario later needs, and `capacity` is therefore evaluated on the trap's
own grid and pinned when spectra are computed on shared grids.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._backend import bound_eigh_tridiagonal
from .exceptions import NumericsError
from .traps import Grid, TrapShape, TrapSpec, dimensionless_depth, evaluate_potential

THRESHOLD_FRACTION = 1e-6  # bound-state cutoff: E < -THRESHOLD_FRACTION * depth


@dataclass(frozen=True)
class GridPolicy:
    """Tunable knobs of the automatic grid construction."""

    margin_decay_lengths: float = 10.0
    min_points: int = 2001

    def __post_init__(self):
        if not self.margin_decay_lengths > 0:
            raise ValueError("margin_decay_lengths must be positive")
        if self.min_points < 3:
            raise ValueError("min_points must be at least 3")


DEFAULT_POLICY = GridPolicy()


@dataclass(frozen=True)
class TridiagonalHamiltonian:
    """Symmetric tridiagonal Hamiltonian: d_i = 2/dx^2 + V(x_i), e_i = -1/dx^2."""

    diagonal: np.ndarray
    off_diagonal: np.ndarray
    grid: Grid

    @property
    def potential_depth(self) -> float:
        dx = self.grid.spacing
        return max(0.0, -float(np.min(self.diagonal - 2.0 / dx**2)))


@dataclass(frozen=True)
class BoundSpectrum:
    """Bound eigenpairs of a trap on a grid.

    energies are ascending and all below -threshold; eigenfunctions is an
    (n_points, capacity) array normalized so that sum(phi**2) * dx = 1, with
    the sign fixed so the first nonzero entry from the left is positive.
    Energies found in the band [-threshold, 0) are reported separately in
    near_threshold rather than silently counted; they are box-sensitive.
    """

    energies: np.ndarray
    eigenfunctions: np.ndarray
    grid: Grid
    near_threshold: np.ndarray

    @property
    def capacity(self) -> int:
        return len(self.energies)

    def parities(self) -> np.ndarray:
        """Signed overlap of each eigenfunction with its mirror image."""
        dx = self.grid.spacing
        return np.round(np.einsum("ij,ij->j", self.eigenfunctions, self.eigenfunctions[::-1]) * dx)


def sampled_potential(spec: TrapSpec, grid: Grid) -> np.ndarray:
    """Potential samples used by `discretize`.

    Smooth shapes are point-sampled.  The square well is cell-averaged so
    that the cell containing the wall carries the exact mean of the jump;
    point-sampling a discontinuity would degrade the eigenvalue error from
    O(dx^2) to O(dx).
    """
    x = grid.points()
    if spec.shape is TrapShape.SQUARE_WELL:
        dx = grid.spacing
        lo, hi = x - dx / 2.0, x + dx / 2.0
        overlap = np.minimum(hi, spec.half_width) - np.maximum(lo, -spec.half_width)
        return -spec.depth * np.clip(overlap / dx, 0.0, 1.0)
    return evaluate_potential(spec, x)


def discretize(spec: TrapSpec, grid: Grid) -> TridiagonalHamiltonian:
    """Central second differences plus the sampled potential."""
    dx = grid.spacing
    diag = 2.0 / dx**2 + sampled_potential(spec, grid)
    off = np.full(grid.n_points - 1, -1.0 / dx**2)
    return TridiagonalHamiltonian(diag, off, grid)


def solve_bound_states(
    hamiltonian: TridiagonalHamiltonian,
    threshold: float | None = None,
) -> BoundSpectrum:
    """All eigenpairs below -threshold, ascending, dx-orthonormalized.

    threshold defaults to THRESHOLD_FRACTION times the sampled well depth.
    """
    grid = hamiltonian.grid
    if threshold is None:
        threshold = THRESHOLD_FRACTION * hamiltonian.potential_depth
    w, v = bound_eigh_tridiagonal(
        np.asarray(hamiltonian.diagonal, dtype=float),
        np.asarray(hamiltonian.off_diagonal, dtype=float),
        0.0,
    )
    bound = w < -threshold
    near = w[~bound]
    w, v = w[bound], v[:, bound]
    if w.size and np.any(np.diff(w) <= 0):
        raise NumericsError("bound energies are not strictly increasing")

    dx = grid.spacing
    v = v / math.sqrt(dx)
    # sign convention: first entry exceeding 1e-12 of the peak is positive
    if w.size:
        mags = np.abs(v)
        first = np.argmax(mags > 1e-12 * mags.max(axis=0), axis=0)
        signs = np.sign(v[first, np.arange(v.shape[1])])
        signs[signs == 0] = 1.0
        v = v * signs
    return BoundSpectrum(w, v, grid, near)


def resolution_shift(spec: TrapSpec, grid: Grid) -> float:
    """Relative change of the shallowest bound energy under one refinement.

    Used as the under-resolution diagnostic: values above ~1e-3 mean the
    grid does not resolve the trap faithfully.
    """
    coarse = solve_trap(spec, grid)
    if coarse.capacity == 0:
        return 0.0
    fine = solve_trap(spec, Grid(grid.x_min, grid.x_max, 2 * grid.n_points - 1))
    if fine.capacity < coarse.capacity:
        return math.inf
    top = coarse.capacity - 1
    return abs(fine.energies[top] - coarse.energies[top]) / abs(coarse.energies[top])


def _dimensionless_profile(shape: TrapShape, u: float, sigma_tilde: float):
    """(depth, spacing rule, classical-extent function) at L = 1."""
    vt = u if shape is TrapShape.INVERTED_GAUSSIAN else u / 4.0
    if shape is TrapShape.INVERTED_GAUSSIAN:
        extent = lambda E: math.sqrt(2.0 * math.log(max(vt / E, 1.1)))
    else:
        extent = lambda E: 1.0 + 5.0 * sigma_tilde
    return vt, extent


def _spacing_rule(shape: TrapShape, vt: float, sigma_tilde: float) -> float:
    rules = [1.0 / 200.0]
    if vt > 0:
        rules.append(2.0 * math.pi / math.sqrt(vt) / 16.0)
    if sigma_tilde > 0:
        rules.append(sigma_tilde / 8.0)
    return min(rules)


def _solve_family(shape: TrapShape, u: float, sigma_tilde: float, box: float, dx: float):
    """Eigenvalues (only) of the L=1 family member on a given box."""
    half = int(math.ceil(box / dx))
    n = 2 * half + 1
    grid = Grid(-half * dx, half * dx, n)
    spec = _unit_member(shape, u, sigma_tilde)
    ham = discretize(spec, grid)
    w, _ = bound_eigh_tridiagonal(ham.diagonal, ham.off_diagonal, 0.0)
    vt = u if shape is TrapShape.INVERTED_GAUSSIAN else u / 4.0
    return w[w < -THRESHOLD_FRACTION * vt]


def _unit_member(shape: TrapShape, u: float, sigma_tilde: float) -> TrapSpec:
    vt = u if shape is TrapShape.INVERTED_GAUSSIAN else u / 4.0
    return TrapSpec(shape, vt, 1.0, sigma_tilde)


def _shallow_area(shape: TrapShape, sigma_tilde: float) -> float:
    """Half the integral of |V|/V at L = 1; sets the weak-binding scale
    kappa = V * area of a shallow well."""
    if shape is TrapShape.INVERTED_GAUSSIAN:
        return math.sqrt(2.0 * math.pi) / 2.0
    if shape is TrapShape.BATHTUB:
        return 1.0 + sigma_tilde * math.log(2.0)
    return 1.0


@lru_cache(maxsize=1024)
def _family_box(shape: TrapShape, u: float, sigma_tilde: float, margin: float) -> float:
    """Dimensionless half-box from the one-pass coarse margin estimate."""
    vt, extent = _dimensionless_profile(shape, u, sigma_tilde)
    if vt == 0.0:
        return extent(1.0) + 2.0
    guess = math.pi * math.sqrt(vt)  # top-of-well level-spacing scale
    box_c = extent(guess) + margin / math.sqrt(guess)
    dxc = min(2.0 * math.pi / math.sqrt(vt) / 16.0, 1.0 / 50.0)
    if sigma_tilde > 0:
        dxc = min(dxc, sigma_tilde / 4.0)
    w1 = _solve_family(shape, u, sigma_tilde, box_c, dxc)
    w2 = _solve_family(shape, u, sigma_tilde, box_c, dxc / 2.0)
    shallow = None
    eps = THRESHOLD_FRACTION * vt
    for j in range(min(len(w1), len(w2)) - 1, -1, -1):
        extrapolated = w2[j] + (w2[j] - w1[j]) / 3.0
        if extrapolated < -eps:
            shallow = -extrapolated
            break
    if shallow is None:
        shallow = min(0.8 * (vt * _shallow_area(shape, sigma_tilde)) ** 2, guess)
    return extent(shallow) + margin / math.sqrt(shallow)


def auto_grid(spec: TrapSpec, policy: GridPolicy = DEFAULT_POLICY) -> Grid:
    """Policy grid for a single trap; see the module docstring."""
    u = dimensionless_depth(spec)
    st = spec.sigma_tilde
    box = _family_box(spec.shape, u, st, policy.margin_decay_lengths)
    vt = u if spec.shape is TrapShape.INVERTED_GAUSSIAN else u / 4.0
    dx_rule = _spacing_rule(spec.shape, vt, st)
    m = max(int(math.ceil(1.0 / dx_rule)), int(math.ceil((policy.min_points - 1) / 2.0 / box)))
    half = int(math.ceil(box * m))
    dx = spec.half_width / m
    return Grid(-half * dx, half * dx, 2 * half + 1)


def common_grid(specs, policy: GridPolicy = DEFAULT_POLICY) -> Grid:
    """One grid covering several traps: union box, finest spacing.

    The spacing is snapped to a submultiple of the first trap's half-width,
    so square walls of the first (usually the initial) trap stay on grid.
    """
    specs = list(specs)
    box_phys = 0.0
    dx_target = math.inf
    for spec in specs:
        u = dimensionless_depth(spec)
        st = spec.sigma_tilde
        box_phys = max(
            box_phys,
            spec.half_width * _family_box(spec.shape, u, st, policy.margin_decay_lengths),
        )
        vt = u if spec.shape is TrapShape.INVERTED_GAUSSIAN else u / 4.0
        dx_target = min(dx_target, spec.half_width * _spacing_rule(spec.shape, vt, st))
    lead = specs[0].half_width
    m = int(math.ceil(lead / dx_target))
    dx = lead / m
    half = int(math.ceil(box_phys / dx))
    if 2 * half + 1 < policy.min_points:
        factor = int(math.ceil((policy.min_points - 1) / 2.0 / half))
        m *= factor
        dx = lead / m
        half = int(math.ceil(box_phys / dx))
    return Grid(-half * dx, half * dx, 2 * half + 1)


def solve_trap(spec: TrapSpec, grid: Grid | None = None,
               policy: GridPolicy = DEFAULT_POLICY) -> BoundSpectrum:
    """Solve a trap on its policy grid (or an explicit one)."""
    if grid is None:
        grid = auto_grid(spec, policy)
    return solve_bound_states(discretize(spec, grid))


@lru_cache(maxsize=4096)
def _capacity_cached(shape: TrapShape, u: float, sigma_tilde: float,
                     margin: float, min_points: int) -> int:
    spec = _unit_member(shape, u, sigma_tilde)
    policy = GridPolicy(margin, min_points)
    return solve_trap(spec, policy=policy).capacity


def capacity(spec: TrapSpec, grid: Grid | None = None,
             policy: GridPolicy = DEFAULT_POLICY) -> int:
    """Number of bound states on the trap's own policy grid.

    This is a family invariant: it depends only on (shape, U, sigma/L) and
    the policy, never on the box some larger computation happens to use.
    """
    if grid is not None:
        return solve_trap(spec, grid).capacity
    return _capacity_cached(spec.shape, dimensionless_depth(spec), spec.sigma_tilde,
                            policy.margin_decay_lengths, policy.min_points)


def solve_trap_pinned(spec: TrapSpec, grid: Grid,
                      policy: GridPolicy = DEFAULT_POLICY) -> BoundSpectrum:
    """Solve on a shared grid, truncated to the trap's pinned capacity.

    A box larger than the trap's own margin can bind extra beyond-horizon
    marginal states; those are dropped so that the bound set agrees with
    `capacity(spec)` regardless of the companion trap.  The converse also
    happens: a finer shared grid may unbind the trap's own shallowest
    marginal state.  Losing that single state is routine box-sensitivity
    and passes silently; losing more indicates an under-resolved grid and
    warns.
    """
    cap = capacity(spec, policy=policy)
    spectrum = solve_bound_states(discretize(spec, grid))
    if spectrum.capacity < cap:
        if spectrum.capacity < cap - 1:
            warnings.warn(
                f"shared grid resolves only {spectrum.capacity} of {cap} pinned "
                f"bound states", RuntimeWarning, stacklevel=2)
        return spectrum
    return BoundSpectrum(
        spectrum.energies[:cap],
        spectrum.eigenfunctions[:, :cap],
        spectrum.grid,
        spectrum.near_threshold,
    )


@lru_cache(maxsize=256)
def _calibrated_depth_cached(shape: TrapShape, sigma_tilde: float, target: int,
                             u_lo: float, u_hi: float, margin: float,
                             min_points: int) -> float:
    policy = GridPolicy(margin, min_points)

    def cap_of(u):
        return capacity(_unit_member(shape, u, sigma_tilde), policy=policy)

    def upper_transition(c):
        lo, hi = u_lo, u_hi
        if not (cap_of(lo) <= c < cap_of(hi)):
            raise NumericsError(
                f"capacity target {target} not bracketed by U in [{u_lo}, {u_hi}]")
        while hi / lo > 1.0005:
            mid = math.sqrt(lo * hi)
            if cap_of(mid) > c:
                hi = mid
            else:
                lo = mid
        return math.sqrt(lo * hi)

    return math.sqrt(upper_transition(target - 1) * upper_transition(target))


def calibrate_family_depth(shape: TrapShape, sigma_tilde: float, target_capacity: int,
                           u_bracket: tuple[float, float] | None = None,
                           policy: GridPolicy = DEFAULT_POLICY) -> float:
    """Dimensionless depth U whose family holds exactly `target_capacity`
    bound states (midpoint of the capacity plateau, found by bisection)."""
    if target_capacity < 1:
        raise ValueError("target_capacity must be >= 1")
    if u_bracket is None:
        # semiclassical capacity: sqrt(U)/pi for flat-bottomed wells,
        # (2/sqrt(pi)) sqrt(U) for the Gaussian
        if shape is TrapShape.INVERTED_GAUSSIAN:
            nominal = target_capacity**2 * math.pi / 4.0
        else:
            nominal = (target_capacity * math.pi) ** 2
        u_bracket = (0.25 * nominal, 2.5 * nominal)
    return _calibrated_depth_cached(shape, sigma_tilde, target_capacity,
                                    u_bracket[0], u_bracket[1],
                                    policy.margin_decay_lengths, policy.min_points)
