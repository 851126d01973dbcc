"""Shared test oracles, independent of the solver implementation."""

import math

import numpy as np


def square_well_levels(depth: float, half_width: float) -> np.ndarray:
    """Bound energies of the finite square well from the matching equations.

    Even states solve  z tan z = sqrt(z0^2 - z^2),
    odd states solve  -z cot z = sqrt(z0^2 - z^2),  with z = k L and
    z0 = sqrt(V) L; every pi/2 branch intersecting (0, z0) holds one root.
    Pure bisection, no finite differences anywhere.
    """
    z0 = math.sqrt(depth) * half_width
    energies = []
    n_branches = int(math.ceil(2.0 * z0 / math.pi))
    for j in range(n_branches):
        a = j * math.pi / 2.0 + 1e-12
        b = min((j + 1) * math.pi / 2.0 - 1e-12, z0 * (1.0 - 1e-15))
        if a >= b:
            break
        even = j % 2 == 0

        def f(z):
            kappa = math.sqrt(max(z0 * z0 - z * z, 0.0))
            if even:
                return z * math.tan(z) - kappa
            return -z / math.tan(z) - kappa

        fa, fb = f(a), f(b)
        if fa * fb > 0:
            continue
        for _ in range(200):
            mid = 0.5 * (a + b)
            if f(a) * f(mid) <= 0:
                b = mid
            else:
                a = mid
        z = 0.5 * (a + b)
        energies.append(z * z / half_width**2 - depth)
    return np.array(sorted(energies))


def random_kernel(rng: np.random.Generator, size: int) -> np.ndarray:
    """Random symmetric matrix with spectrum drawn uniformly from [0, 1]."""
    lam = rng.uniform(0.0, 1.0, size)
    q, _ = np.linalg.qr(rng.normal(size=(size, size)))
    return (q * lam) @ q.T
