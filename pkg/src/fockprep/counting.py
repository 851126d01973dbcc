"""Atom-number counting statistics of the reduced trap.

Everything derives from one object: the kernel matrix B, the matrix of the
(weighted) initial-state projector in the final bound basis,

    B_nm = sum_k w_k <phi_n^f | phi_k^i> <phi_k^i | phi_m^f>.

B is symmetric with spectrum in [0, 1]; its eigenvalues are the success
probabilities of independent Bernoulli trials for the occupation of each
final mode, so the trapped-atom number follows a Poisson binomial law.
The characteristic function is the determinant

    F(theta) = det[ 1 + (e^{i theta} - 1) B ],

a trigonometric polynomial of degree C_f with non-negative frequencies
only, which an equally spaced (C_f + 1)-point sample inverts exactly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import GridMismatchError, NumericsError
from .occupations import OccupationState
from .solver import BoundSpectrum

EIG_ABORT = 1e-8     # eigenvalues outside [-EIG_ABORT, 1 + EIG_ABORT] abort
EIG_QUIET = 1e-12    # clamps smaller than this are silent roundoff


@dataclass(frozen=True)
class OverlapMatrix:
    """S[k, n] = <phi_k^initial | phi_n^final>, dx-weighted, one shared grid."""

    matrix: np.ndarray

    def column_norms(self) -> np.ndarray:
        return np.sqrt(np.sum(self.matrix**2, axis=0))


def overlap_matrix(initial: BoundSpectrum, final: BoundSpectrum) -> OverlapMatrix:
    if initial.grid != final.grid:
        raise GridMismatchError("spectra must be sampled on the same grid")
    s = initial.eigenfunctions.T @ final.eigenfunctions * initial.grid.spacing
    norms = np.sqrt(np.sum(s**2, axis=0))
    if norms.size and norms.max() > 1.0 + 1e-8:
        raise NumericsError(
            f"overlap column norm {norms.max():.12f} exceeds 1; "
            f"eigenfunctions are not orthonormal")
    return OverlapMatrix(s)


@dataclass
class KernelMatrix:
    """Symmetric kernel B with spectrum in [0, 1]; eigenvalues cached."""

    matrix: np.ndarray
    _eigenvalues: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        """Ascending eigenvalues, validated and clamped to [0, 1].

        Excursions beyond [-1e-8, 1 + 1e-8] raise (they indicate an
        upstream orthonormality bug, not roundoff); smaller ones are
        clamped, with a warning when they exceed 1e-12.
        """
        if self._eigenvalues is None:
            if self.size == 0:
                self._eigenvalues = np.empty(0)
                return self._eigenvalues
            lam = np.linalg.eigvalsh(self.matrix)
            worst = max(float(-lam.min(initial=0.0)), float(lam.max(initial=0.0) - 1.0))
            if worst > EIG_ABORT:
                raise NumericsError(
                    f"kernel eigenvalue out of [0, 1] by {worst:.3e}; "
                    f"check eigenfunction orthonormality")
            if worst > EIG_QUIET:
                warnings.warn(
                    f"clamping kernel eigenvalues by {worst:.3e}",
                    RuntimeWarning, stacklevel=2)
            self._eigenvalues = np.clip(lam, 0.0, 1.0)
        return self._eigenvalues


def kernel_matrix(overlap: OverlapMatrix, occupation: OccupationState) -> KernelMatrix:
    s = overlap.matrix
    w = np.asarray(occupation.weights, dtype=float)
    if s.shape[0] != w.size:
        raise NumericsError(
            f"overlap has {s.shape[0]} initial levels but occupation has {w.size}")
    b = s.T @ (w[:, None] * s)
    b = 0.5 * (b + b.T)
    return KernelMatrix(b)


def mean_number(kernel: KernelMatrix) -> float:
    """Expected trapped-atom number, Tr B."""
    return float(np.trace(kernel.matrix)) if kernel.size else 0.0


def variance_number(kernel: KernelMatrix) -> float:
    """Number variance, Tr B - Tr B^2 = sum lam_j (1 - lam_j)."""
    if kernel.size == 0:
        return 0.0
    b = kernel.matrix
    return float(np.trace(b) - np.sum(b * b))


def characteristic_function(kernel: KernelMatrix, theta: float) -> complex:
    """det[1 + (e^{i theta} - 1) B]; F(0) = 1, |F| <= 1, F(-t) = conj F(t)."""
    if kernel.size == 0:
        return complex(1.0)
    z = np.exp(1j * theta) - 1.0
    return complex(np.linalg.det(np.eye(kernel.size) + z * kernel.matrix))


def cumulants(kernel: KernelMatrix) -> tuple[float, float, float]:
    """First three cumulants of the atom-number distribution.

    kappa1 = sum(lam), kappa2 = sum(lam (1 - lam)),
    kappa3 = sum(lam (1 - lam) (1 - 2 lam)).
    """
    lam = kernel.eigenvalues
    k1 = float(lam.sum())
    k2 = float((lam * (1.0 - lam)).sum())
    k3 = float((lam * (1.0 - lam) * (1.0 - 2.0 * lam)).sum())
    return k1, k2, k3


@dataclass(frozen=True)
class CountingStatistics:
    """Full distribution p(0..C_f) with its low moments and cumulants."""

    probabilities: np.ndarray
    mean: float
    variance: float
    kappa1: float
    kappa2: float
    kappa3: float

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if abs(p.sum() - 1.0) > 1e-10:
            raise NumericsError(f"distribution sums to {p.sum():.15f}, not 1")
        if p.min(initial=0.0) < 0.0:
            raise NumericsError("distribution has negative entries after clamping")


def _finalize_probabilities(p: np.ndarray) -> np.ndarray:
    if p.min(initial=0.0) < -1e-10:
        raise NumericsError(f"distribution entry {p.min():.3e} below -1e-10")
    return np.clip(p, 0.0, None)


def number_distribution(kernel: KernelMatrix) -> CountingStatistics:
    """Distribution of the trapped-atom number by exact Fourier inversion.

    F(theta) is sampled at the C_f + 1 roots of unity and inverted by a
    plain DFT, which is exact for a degree-C_f trigonometric polynomial.
    """
    cf = kernel.size
    if cf == 0:
        return CountingStatistics(np.array([1.0]), 0.0, 0.0, 0.0, 0.0, 0.0)
    m = cf + 1
    thetas = 2.0 * np.pi * np.arange(m) / m
    samples = np.array([characteristic_function(kernel, t) for t in thetas])
    p = _finalize_probabilities(np.fft.fft(samples).real / m)
    k1, k2, k3 = cumulants(kernel)
    return CountingStatistics(p, mean_number(kernel), variance_number(kernel), k1, k2, k3)


def poisson_binomial_oracle(kernel: KernelMatrix) -> np.ndarray:
    """Independent check on `number_distribution`.

    B's eigenvalues are Bernoulli success probabilities; convolving the
    per-mode two-point laws sequentially gives the exact distribution
    without touching the determinant route.
    """
    p = np.array([1.0])
    for lam in kernel.eigenvalues:
        nxt = np.zeros(p.size + 1)
        nxt[:-1] = p * (1.0 - lam)
        nxt[1:] += p * lam
        p = nxt
    return p


def fock_condition(kernel: KernelMatrix, epsilon: float) -> tuple[float, bool]:
    """(smallest eigenvalue, whether every eigenvalue is within epsilon of 1).

    When satisfied, the distribution is a Kronecker delta at C_f up to
    C_f * epsilon.  An empty kernel is vacuously satisfied.
    """
    if kernel.size == 0:
        return 1.0, True
    smallest = float(kernel.eigenvalues[0])
    return smallest, smallest >= 1.0 - epsilon
