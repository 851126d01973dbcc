import math

import numpy as np
import pytest
from conftest import random_kernel

from fockprep import (
    GridMismatchError,
    KernelMatrix,
    NumericsError,
    TrapShape,
    characteristic_function,
    cumulants,
    family_member,
    fock_condition,
    kernel_matrix,
    mean_number,
    number_distribution,
    overlap_matrix,
    poisson_binomial_oracle,
    solve_trap,
    variance_number,
)
from fockprep.occupations import OccupationState
from fockprep.traps import Grid

PI2 = math.pi**2


def _occupation(weights):
    w = np.asarray(weights, dtype=float)
    kt = 0.0 if set(np.unique(w)) <= {0.0, 1.0} else 1.0
    return OccupationState(w, float(w.sum()), kt, None if kt == 0.0 else -1.0)


@pytest.fixture(scope="module")
def spectrum_pair():
    initial = solve_trap(family_member(4e2 * PI2, 0.05, 1.0, TrapShape.BATHTUB))
    final = solve_trap(family_member(4e2 * PI2, 0.05, 1.0, TrapShape.BATHTUB))
    return initial, final


def test_overlap_identity_for_identical_traps(spectrum_pair):
    initial, final = spectrum_pair
    s = overlap_matrix(initial, final)
    np.testing.assert_allclose(s.matrix, np.eye(initial.capacity), atol=1e-12)


def test_overlap_parity_selection(spectrum_pair):
    initial, _ = spectrum_pair
    final = solve_trap(family_member(1e2 * PI2, 0.05, 1.0, TrapShape.BATHTUB),
                       initial.grid)
    s = overlap_matrix(initial, final).matrix
    k, n = np.meshgrid(np.arange(s.shape[0]), np.arange(s.shape[1]), indexing="ij")
    opposite = (k + n) % 2 == 1
    assert np.abs(s[opposite]).max() < 1e-10


def test_overlap_grid_mismatch(spectrum_pair):
    initial, _ = spectrum_pair
    other = solve_trap(family_member(4e2 * PI2, 0.05, 1.0, TrapShape.BATHTUB),
                       Grid(-4.0, 4.0, 4001))
    with pytest.raises(GridMismatchError):
        overlap_matrix(initial, other)


def test_kernel_completeness_gives_identity(spectrum_pair):
    initial, final = spectrum_pair
    s = overlap_matrix(initial, final)
    b = kernel_matrix(s, _occupation(np.ones(initial.capacity)))
    np.testing.assert_allclose(b.matrix, np.eye(final.capacity), atol=1e-11)


def test_kernel_single_level():
    s11 = 0.83
    b = KernelMatrix(np.array([[s11**2]]))
    assert mean_number(b) == pytest.approx(s11**2)
    assert variance_number(b) == pytest.approx(s11**2 * (1 - s11**2))


def test_kernel_eigenvalue_validation():
    good = KernelMatrix(np.diag([0.5, 1.0 + 1e-13]))
    np.testing.assert_array_equal(good.eigenvalues, [0.5, 1.0])
    with pytest.warns(RuntimeWarning, match="clamping"):
        KernelMatrix(np.diag([-1e-10, 0.5])).eigenvalues
    with pytest.raises(NumericsError):
        KernelMatrix(np.diag([1.0 + 1e-6])).eigenvalues


def test_mean_and_variance_closed_forms():
    assert mean_number(KernelMatrix(np.eye(10))) == pytest.approx(10.0)
    assert variance_number(KernelMatrix(np.eye(10))) == pytest.approx(0.0, abs=1e-12)
    half = KernelMatrix(0.5 * np.eye(10))
    assert mean_number(half) == pytest.approx(5.0)
    assert variance_number(half) == pytest.approx(2.5)


def test_characteristic_function_closed_forms():
    ident = KernelMatrix(np.eye(7))
    for theta in (0.0, 0.3, -1.2, math.pi):
        assert characteristic_function(ident, theta) == pytest.approx(
            np.exp(1j * theta * 7), abs=1e-12)
    zero = KernelMatrix(np.zeros((4, 4)))
    assert characteristic_function(zero, 0.9) == pytest.approx(1.0)
    lam = np.array([0.2, 0.7, 0.95])
    diag = KernelMatrix(np.diag(lam))
    theta = 0.77
    expected = np.prod(1 + (np.exp(1j * theta) - 1) * lam)
    assert characteristic_function(diag, theta) == pytest.approx(expected, abs=1e-13)


def test_characteristic_function_symmetry(spectrum_pair):
    rng = np.random.default_rng(3)
    b = KernelMatrix(random_kernel(rng, 8))
    for theta in (0.4, 1.1, 2.9):
        f_plus = characteristic_function(b, theta)
        f_minus = characteristic_function(b, -theta)
        assert abs(f_minus - np.conj(f_plus)) < 1e-12
        assert abs(f_plus) <= 1 + 1e-12
    assert characteristic_function(b, 0.0) == pytest.approx(1.0, abs=1e-14)


def test_distribution_closed_forms():
    stats = number_distribution(KernelMatrix(np.eye(10)))
    expected = np.zeros(11)
    expected[10] = 1.0
    np.testing.assert_allclose(stats.probabilities, expected, atol=1e-12)
    pair = number_distribution(KernelMatrix(0.5 * np.eye(2)))
    np.testing.assert_allclose(pair.probabilities, [0.25, 0.5, 0.25], atol=1e-12)


def test_poisson_binomial_closed_forms():
    np.testing.assert_allclose(
        poisson_binomial_oracle(KernelMatrix(np.eye(5))),
        [0, 0, 0, 0, 0, 1], atol=1e-15)
    np.testing.assert_allclose(
        poisson_binomial_oracle(KernelMatrix(np.array([[0.5]]))),
        [0.5, 0.5], atol=1e-15)
    np.testing.assert_allclose(
        poisson_binomial_oracle(KernelMatrix(np.diag([0.3, 0.7]))),
        [0.21, 0.58, 0.21], atol=1e-14)


def test_distribution_matches_oracle_on_random_kernels():
    rng = np.random.default_rng(42)
    for _ in range(25):
        size = int(rng.integers(1, 13))
        b = KernelMatrix(random_kernel(rng, size))
        stats = number_distribution(b)
        np.testing.assert_allclose(stats.probabilities, poisson_binomial_oracle(b),
                                   atol=1e-10)
        assert abs(stats.probabilities.sum() - 1.0) < 1e-10


def test_moments_match_distribution():
    rng = np.random.default_rng(11)
    b = KernelMatrix(random_kernel(rng, 9))
    stats = number_distribution(b)
    n = np.arange(stats.probabilities.size)
    mean_p = float(n @ stats.probabilities)
    var_p = float((n**2) @ stats.probabilities) - mean_p**2
    assert abs(mean_p - mean_number(b)) < 1e-8
    assert abs(var_p - variance_number(b)) < 1e-8
    k1, k2, k3 = cumulants(b)
    assert (k1, k2) == (stats.kappa1, stats.kappa2)
    third_central = float(((n - mean_p) ** 3) @ stats.probabilities)
    assert abs(third_central - k3) < 1e-8


def test_cumulant_closed_forms():
    k1, k2, k3 = cumulants(KernelMatrix(np.eye(6)))
    assert (k1, k2, k3) == pytest.approx((6.0, 0.0, 0.0), abs=1e-12)
    k1, k2, k3 = cumulants(KernelMatrix(np.array([[0.5]])))
    assert (k1, k2, k3) == pytest.approx((0.5, 0.25, 0.0), abs=1e-14)


def test_variance_is_sub_poissonian():
    rng = np.random.default_rng(5)
    for _ in range(20):
        b = KernelMatrix(random_kernel(rng, int(rng.integers(1, 12))))
        assert variance_number(b) <= mean_number(b) + 1e-12
        assert variance_number(b) >= -1e-10


def test_fock_condition():
    assert fock_condition(KernelMatrix(np.eye(4)), 1e-9) == (1.0, True)
    low, ok = fock_condition(KernelMatrix(np.diag([1.0, 0.9])), 1e-3)
    assert low == pytest.approx(0.9) and not ok
    rng = np.random.default_rng(8)
    q, _ = np.linalg.qr(rng.normal(size=(6, 6)))
    lam = 1.0 - rng.uniform(0.0, 1e-4, 6)
    b = KernelMatrix((q * lam) @ q.T)
    eps = 1e-3
    low, ok = fock_condition(b, eps)
    assert ok
    stats = number_distribution(b)
    assert stats.probabilities[-1] >= 1.0 - 6 * eps


def test_empty_kernel_edge_case():
    empty = KernelMatrix(np.empty((0, 0)))
    stats = number_distribution(empty)
    np.testing.assert_array_equal(stats.probabilities, [1.0])
    assert (stats.mean, stats.variance) == (0.0, 0.0)
    assert fock_condition(empty, 1e-6) == (1.0, True)


def test_thermal_kernel_stays_bernoulli(spectrum_pair):
    initial, final = spectrum_pair
    rng = np.random.default_rng(13)
    weights = np.sort(rng.uniform(0.0, 1.0, initial.capacity))[::-1]
    s = overlap_matrix(initial, final)
    b = kernel_matrix(s, _occupation(weights))
    lam = b.eigenvalues
    assert lam.min() >= 0.0 and lam.max() <= 1.0
    np.testing.assert_allclose(number_distribution(b).probabilities,
                               poisson_binomial_oracle(b), atol=1e-10)
