"""Eigensolver backend selection.

The hot kernel (tridiagonal bound-state extraction) has two interchangeable
implementations: a compiled Cython module built at install time, and a
scipy/LAPACK fallback (stebz + stein, the same bisection plus inverse
iteration algorithm).  The compiled kernel is preferred when importable;
set FOCKPREP_BACKEND=scipy or FOCKPREP_BACKEND=compiled to force a choice.
"""

from __future__ import annotations

import os

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .exceptions import ConvergenceError

try:
    from . import _sturm

    HAVE_COMPILED = True
except ImportError:
    _sturm = None
    HAVE_COMPILED = False


def bound_eigh_tridiagonal_scipy(diag, offdiag, emax):
    """Eigenpairs below emax via LAPACK bisection + inverse iteration."""
    diag = np.ascontiguousarray(diag, dtype=float)
    offdiag = np.ascontiguousarray(offdiag, dtype=float)
    n = diag.size
    radius = np.zeros(n)
    radius[:-1] += np.abs(offdiag)
    radius[1:] += np.abs(offdiag)
    gl = float(np.min(diag - radius))
    gl -= abs(gl) * 1e-12 + 1.0
    if gl >= emax:
        return np.empty(0), np.empty((n, 0))
    w, v = eigh_tridiagonal(diag, offdiag, select="v", select_range=(gl, emax))
    keep = w < emax  # LAPACK's range is half-open on the other side
    return w[keep], v[:, keep]


def bound_eigh_tridiagonal_compiled(diag, offdiag, emax):
    if not HAVE_COMPILED:
        raise ImportError("compiled _sturm kernel is not available")
    diag = np.ascontiguousarray(diag, dtype=float)
    offdiag = np.ascontiguousarray(offdiag, dtype=float)
    try:
        return _sturm.bound_eigh_tridiagonal(diag, offdiag, emax)
    except RuntimeError as exc:
        raise ConvergenceError(str(exc)) from exc


_requested = os.environ.get("FOCKPREP_BACKEND", "").strip().lower()
if _requested not in ("", "scipy", "compiled"):
    raise ImportError(f"FOCKPREP_BACKEND must be 'scipy' or 'compiled', got {_requested!r}")
if _requested == "compiled" and not HAVE_COMPILED:
    raise ImportError("FOCKPREP_BACKEND=compiled but the extension is not built")

if _requested == "scipy" or not HAVE_COMPILED:
    BACKEND = "scipy"
    bound_eigh_tridiagonal = bound_eigh_tridiagonal_scipy
else:
    BACKEND = "compiled"
    bound_eigh_tridiagonal = bound_eigh_tridiagonal_compiled
