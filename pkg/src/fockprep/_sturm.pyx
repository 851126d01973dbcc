# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled tridiagonal bound-state kernel.

Locates all eigenvalues of a real symmetric tridiagonal matrix below a
cutoff by Sturm-sequence bisection, then computes the eigenvectors by
inverse iteration with a partially pivoted tridiagonal LU.  Only the
handful of bound states is ever computed, never the full spectrum.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

cdef double EPS = 2.220446049250313e-16


cdef int _sturm_count(const double* d, const double* e2, Py_ssize_t n,
                      double x, double pivmin) noexcept nogil:
    """Number of eigenvalues strictly below x (negative pivots of LDL^T)."""
    cdef Py_ssize_t i
    cdef double q = d[0] - x
    cdef int cnt = 1 if q < 0.0 else 0
    for i in range(1, n):
        if fabs(q) < pivmin:
            q = -pivmin
        q = d[i] - x - e2[i - 1] / q
        if q < 0.0:
            cnt += 1
    return cnt


DEF BATCH = 8


cdef void _sturm_count_batch(const double* d, const double* e2, Py_ssize_t n,
                             const double* xs, int* cnts, int nb,
                             double pivmin) noexcept nogil:
    """Sturm counts for up to BATCH shifts in one pass over the matrix.

    Interleaving the LDL^T recurrences pipelines the per-point divisions,
    which otherwise dominate the bisection cost.
    """
    cdef double q[BATCH]
    cdef int c[BATCH]
    cdef Py_ssize_t i
    cdef int b
    cdef double di, e2i, qb
    for b in range(nb):
        q[b] = d[0] - xs[b]
        c[b] = 1 if q[b] < 0.0 else 0
    for i in range(1, n):
        di = d[i]
        e2i = e2[i - 1]
        for b in range(nb):
            qb = q[b]
            if fabs(qb) < pivmin:
                qb = -pivmin
            qb = di - xs[b] - e2i / qb
            q[b] = qb
            if qb < 0.0:
                c[b] += 1
    for b in range(nb):
        cnts[b] = c[b]


cdef Py_ssize_t _bisect_round(const double* d, const double* e2, Py_ssize_t n,
                              double[::1] lo, double[::1] hi, int m,
                              double pivmin) noexcept nogil:
    """One bisection round for every unconverged eigenvalue; returns the
    number still open.  Batches the Sturm counts BATCH shifts at a time."""
    cdef double mids[BATCH]
    cdef int cnts[BATCH]
    cdef Py_ssize_t ks[BATCH]
    cdef Py_ssize_t k, nb, b, open_count = 0
    nb = 0
    for k in range(m):
        if hi[k] - lo[k] > 2.0 * EPS * (fabs(lo[k]) + fabs(hi[k])) + 2.0 * pivmin:
            open_count += 1
            mids[nb] = 0.5 * (lo[k] + hi[k])
            ks[nb] = k
            nb += 1
            if nb == BATCH:
                _sturm_count_batch(d, e2, n, mids, cnts, nb, pivmin)
                for b in range(nb):
                    if cnts[b] >= ks[b] + 1:
                        hi[ks[b]] = mids[b]
                    else:
                        lo[ks[b]] = mids[b]
                nb = 0
    if nb > 0:
        _sturm_count_batch(d, e2, n, mids, cnts, nb, pivmin)
        for b in range(nb):
            if cnts[b] >= ks[b] + 1:
                hi[ks[b]] = mids[b]
            else:
                lo[ks[b]] = mids[b]
    return open_count


cdef void _gttrf(double* dl, double* dd, double* du, double* du2,
                 int* ipiv, Py_ssize_t n, double pivmin) noexcept nogil:
    """Tridiagonal LU with partial pivoting (LAPACK dgttrf layout)."""
    cdef Py_ssize_t i
    cdef double fact, temp
    for i in range(n - 2):
        du2[i] = 0.0
    for i in range(n - 1):
        if fabs(dd[i]) >= fabs(dl[i]):
            ipiv[i] = 0
            if fabs(dd[i]) < pivmin:
                dd[i] = pivmin if dd[i] >= 0.0 else -pivmin
            fact = dl[i] / dd[i]
            dl[i] = fact
            dd[i + 1] = dd[i + 1] - fact * du[i]
        else:
            ipiv[i] = 1
            fact = dd[i] / dl[i]
            dd[i] = dl[i]
            dl[i] = fact
            temp = du[i]
            du[i] = dd[i + 1]
            dd[i + 1] = temp - fact * dd[i + 1]
            if i < n - 2:
                du2[i] = du[i + 1]
                du[i + 1] = -fact * du[i + 1]
    if fabs(dd[n - 1]) < pivmin:
        dd[n - 1] = pivmin if dd[n - 1] >= 0.0 else -pivmin


cdef void _gtts2(const double* dl, const double* dd, const double* du,
                 const double* du2, const int* ipiv, double* b,
                 Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    cdef double temp
    for i in range(n - 1):
        if ipiv[i] == 0:
            b[i + 1] = b[i + 1] - dl[i] * b[i]
        else:
            temp = b[i]
            b[i] = b[i + 1]
            b[i + 1] = temp - dl[i] * b[i + 1]
    b[n - 1] = b[n - 1] / dd[n - 1]
    if n > 1:
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / dd[n - 2]
    for i in range(n - 3, -1, -1):
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / dd[i]


cdef inline unsigned long long _xorshift(unsigned long long s) noexcept nogil:
    s ^= s << 13
    s ^= s >> 7
    s ^= s << 17
    return s


def bound_eigh_tridiagonal(double[::1] diag, double[::1] offdiag, double emax):
    """All eigenpairs with eigenvalue < emax, ascending.

    Parameters
    ----------
    diag, offdiag : main and first off-diagonal of the symmetric matrix
    emax : eigenvalue cutoff

    Returns
    -------
    (w, v) : eigenvalues shape (m,), eigenvectors shape (n, m) with unit
        Euclidean columns.
    """
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t i, j, k
    if offdiag.shape[0] != n - 1:
        raise ValueError("offdiag must have length n - 1")

    e2_arr = np.square(np.asarray(offdiag))
    cdef double[::1] e2 = e2_arr
    cdef double pivmin = max(float(np.max(e2_arr)) if n > 1 else 1.0, 1.0) * 2.2250738585072014e-308

    # Gershgorin lower bound
    cdef double gl = diag[0], r
    for i in range(n):
        r = 0.0
        if i > 0:
            r += fabs(offdiag[i - 1])
        if i < n - 1:
            r += fabs(offdiag[i])
        if diag[i] - r < gl:
            gl = diag[i] - r
    gl -= fabs(gl) * 1e-12 + 2.0 * pivmin

    cdef const double* dp = &diag[0]
    cdef const double* e2p = &e2[0]
    cdef int m
    with nogil:
        m = _sturm_count(dp, e2p, n, emax, pivmin)
    if m <= 0:
        return np.empty(0), np.empty((n, 0))

    lo_arr = np.full(m, gl)
    hi_arr = np.full(m, emax)
    cdef double[::1] lo = lo_arr
    cdef double[::1] hi = hi_arr
    cdef Py_ssize_t still_open = m
    cdef int rounds = 0
    while still_open > 0 and rounds < 200:
        with nogil:
            still_open = _bisect_round(dp, e2p, n, lo, hi, m, pivmin)
        rounds += 1
        # tighten brackets from the ordering of the spectrum
        np.maximum.accumulate(lo_arr, out=lo_arr)
        np.minimum.accumulate(hi_arr[::-1], out=hi_arr[::-1])
    w_arr = 0.5 * (lo_arr + hi_arr)
    cdef double[::1] w = w_arr

    # inverse iteration; orthogonalize against all previously found vectors
    # (bound clusters are small, so full Gram-Schmidt is cheap and safe)
    v_arr = np.empty((n, m), order="F")
    cdef double[::1, :] v = v_arr
    cdef double[::1] dl = np.empty(n - 1), dd = np.empty(n), du = np.empty(n - 1)
    cdef double[::1] du2 = np.empty(max(n - 2, 1))
    cdef int[::1] ipiv = np.empty(n - 1, dtype=np.intc)
    cdef double[::1] b = np.empty(n)
    cdef double anorm = float(np.max(np.abs(np.asarray(diag)))) + 2.0 * float(np.max(np.abs(np.asarray(offdiag)))) if n > 1 else fabs(diag[0])
    cdef double lam, nrm, dot, res, resmax
    cdef unsigned long long s
    cdef int it, ok

    resmax = 1e5 * EPS * anorm
    # pivots of the shifted solve are floored at eps * ||T||; the solve only
    # needs to amplify the target eigendirection, and the floor bounds the
    # growth so near-singular shifts cannot overflow to inf
    cdef double pivfloor = max(pivmin, EPS * anorm)
    cdef double scale
    cdef bint finite
    for k in range(m):
        lam = w[k]
        # deterministic pseudo-random start vector
        s = <unsigned long long> (k + 1) * 0x9E3779B97F4A7C15ULL + <unsigned long long> n
        for i in range(n):
            s = _xorshift(s)
            b[i] = (<double> (s >> 11)) / 9007199254740992.0 - 0.5
        ok = 0
        for it in range(8):
            for i in range(n - 1):
                dl[i] = offdiag[i]
                du[i] = offdiag[i]
                dd[i] = diag[i] - lam
            dd[n - 1] = diag[n - 1] - lam
            _gttrf(&dl[0], &dd[0], &du[0], &du2[0], &ipiv[0], n, pivfloor)
            # prescale to unit max entry
            scale = 0.0
            for i in range(n):
                if fabs(b[i]) > scale:
                    scale = fabs(b[i])
            if scale > 0.0:
                for i in range(n):
                    b[i] /= scale
            with nogil:
                _gtts2(&dl[0], &dd[0], &du[0], &du2[0], &ipiv[0], &b[0], n)
            finite = True
            for i in range(n):
                if not (b[i] == b[i] and -1e307 < b[i] < 1e307):
                    finite = False
                    break
            if not finite:
                s = _xorshift(s + 0x2545F4914F6CDD1DULL)
                for i in range(n):
                    s = _xorshift(s)
                    b[i] = (<double> (s >> 11)) / 9007199254740992.0 - 0.5
                continue
            # project out previously found vectors
            for j in range(k):
                dot = 0.0
                for i in range(n):
                    dot += v[i, j] * b[i]
                for i in range(n):
                    b[i] -= dot * v[i, j]
            nrm = 0.0
            for i in range(n):
                nrm += b[i] * b[i]
            nrm = nrm ** 0.5
            if nrm == 0.0:
                s = _xorshift(s + 17)
                for i in range(n):
                    s = _xorshift(s)
                    b[i] = (<double> (s >> 11)) / 9007199254740992.0 - 0.5
                continue
            for i in range(n):
                b[i] /= nrm
            # residual ||T b - lam b||_inf
            res = 0.0
            for i in range(n):
                dot = (diag[i] - lam) * b[i]
                if i > 0:
                    dot += offdiag[i - 1] * b[i - 1]
                if i < n - 1:
                    dot += offdiag[i] * b[i + 1]
                if fabs(dot) > res:
                    res = fabs(dot)
            if res <= resmax:
                ok = 1
                break
        if not ok:
            raise RuntimeError(
                f"inverse iteration did not converge for eigenvalue {k} "
                f"(residual {res:.3e}, tolerance {resmax:.3e})")
        for i in range(n):
            v[i, k] = b[i]

    return w_arr, v_arr
