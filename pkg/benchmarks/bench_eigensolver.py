#!/usr/bin/env python3
"""Benchmark the compiled bound-state kernel against the scipy fallback.

Both implement bisection plus inverse iteration on the discretized trap
Hamiltonian; this compares wall time and cross-checks the results on a few
representative workloads.

    python benchmarks/bench_eigensolver.py [--repeat N]
"""

import argparse
import math
import time

import numpy as np

from fockprep import TrapShape, auto_grid, discretize, family_member
from fockprep._backend import HAVE_COMPILED, bound_eigh_tridiagonal_scipy
from fockprep.solver import GridPolicy

PI2 = math.pi**2


def cases():
    deep = family_member(1e4 * PI2, 0.03, 1.0, TrapShape.BATHTUB)
    final = family_member(1e2 * PI2, 0.03, 0.5, TrapShape.BATHTUB)
    gauss = family_member((28 * math.pi) ** 2, 0.0, 1.0, TrapShape.INVERTED_GAUSSIAN)
    yield "deep bathtub (default grid)", deep, GridPolicy()
    yield "deep bathtub (fine grid)", deep, GridPolicy(10.0, 20001)
    yield "reduced trap family", final, GridPolicy()
    yield "inverted Gaussian", gauss, GridPolicy()


def time_solver(solver, diag, off, repeat):
    best = math.inf
    result = None
    for _ in range(repeat):
        start = time.perf_counter()
        result = solver(diag, off, 0.0)
        best = min(best, time.perf_counter() - start)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    if not HAVE_COMPILED:
        print("compiled kernel not built; showing the scipy fallback only")
    else:
        from fockprep._backend import bound_eigh_tridiagonal_compiled

    print(f"{'case':34} {'n':>7} {'m':>4} {'scipy':>9} {'compiled':>9} {'speedup':>8}")
    for name, spec, policy in cases():
        ham = discretize(spec, auto_grid(spec, policy))
        d, e = np.asarray(ham.diagonal), np.asarray(ham.off_diagonal)
        t_scipy, (w_ref, _) = time_solver(bound_eigh_tridiagonal_scipy, d, e, args.repeat)
        if HAVE_COMPILED:
            t_comp, (w, v) = time_solver(bound_eigh_tridiagonal_compiled, d, e, args.repeat)
            assert w.size == w_ref.size
            assert np.abs(w - w_ref).max() < 1e-9 * np.abs(d).max()
            assert np.abs(v.T @ v - np.eye(w.size)).max() < 1e-10
            print(f"{name:34} {len(d):>7} {w.size:>4} {t_scipy:>8.3f}s "
                  f"{t_comp:>8.3f}s {t_scipy / t_comp:>7.2f}x")
        else:
            print(f"{name:34} {len(d):>7} {w_ref.size:>4} {t_scipy:>8.3f}s "
                  f"{'-':>9} {'-':>8}")


if __name__ == "__main__":
    main()
