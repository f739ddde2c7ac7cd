# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
# cython: cdivision=True
"""Compiled twins of the pure-Python solver kernels.

Same algorithm as ``pyref`` step for step: identical column selection,
tie-breaking, stopping order, and status codes, so results agree with
the reference to floating-point noise. Linear algebra goes through
BLAS/LAPACK directly (dgemv, ddot, dposv); a rank-deficient normal
system is reported via OMP_RANK_DEFICIENT so the caller can redo the
solve with the reference kernel's minimum-norm path.
"""

from libc.math cimport fabs

import numpy as np

from scipy.linalg.cython_blas cimport ddot, dgemv, dnrm2
from scipy.linalg.cython_lapack cimport dposv

OMP_TOL_STOP = 0
OMP_TARGET_REACHED = 1
OMP_STALLED = 2
OMP_RANK_DEFICIENT = 3

IHT_CONVERGED = 0
IHT_MAX_ITERATIONS = 1
IHT_STEP_BREAKDOWN = 2

cdef char CHAR_N = b'N'
cdef char CHAR_T = b'T'
cdef char CHAR_L = b'L'
cdef double ONE = 1.0
cdef double MINUS_ONE = -1.0
cdef double ZERO = 0.0
cdef int INT_ONE = 1


cdef void _mat_vec(const double[:, ::1] a, const double[::1] x, double[::1] out,
                   double alpha, double beta) noexcept nogil:
    # out = alpha * A @ x + beta * out; the C-contiguous (m, n) buffer is
    # the column-major transpose as far as BLAS is concerned
    cdef int m = a.shape[0], n = a.shape[1]
    dgemv(&CHAR_T, &n, &m, &alpha, <double*>&a[0, 0], &n, <double*>&x[0], &INT_ONE,
          &beta, &out[0], &INT_ONE)


cdef void _mat_t_vec(const double[:, ::1] a, const double[::1] r, double[::1] out) noexcept nogil:
    # out = A.T @ r
    cdef int m = a.shape[0], n = a.shape[1]
    dgemv(&CHAR_N, &n, &m, &ONE, <double*>&a[0, 0], &n, <double*>&r[0], &INT_ONE,
          &ZERO, &out[0], &INT_ONE)


def omp_kernel(const double[:, ::1] a, const double[::1] y, int kmax, double residual_tol,
               int max_iterations):
    """See pyref.omp_kernel; returns (x, iterations, status, rank_deficient)."""
    cdef int m = a.shape[0], n = a.shape[1]
    cdef int size = 0, iterations = 0, status = OMP_STALLED
    cdef int i, j, best, info, si, sj
    cdef double bestval, val, rnorm

    x_arr = np.zeros(n)
    r_arr = np.empty(m)
    corr_arr = np.empty(n)
    norms_arr = np.empty(n)
    gram_arr = np.empty(kmax * kmax)
    coef_arr = np.empty(kmax)
    support_arr = np.empty(kmax, dtype=np.int32)
    selected_arr = np.zeros(n, dtype=np.uint8)

    cdef double[::1] x = x_arr
    cdef double[::1] r = r_arr
    cdef double[::1] corr = corr_arr
    cdef double[::1] norms = norms_arr
    cdef double[::1] gram = gram_arr
    cdef double[::1] coef = coef_arr
    cdef int[::1] support = support_arr
    cdef unsigned char[::1] selected = selected_arr

    for j in range(n):
        norms[j] = dnrm2(&m, <double*>&a[0, j], &n)
    for i in range(m):
        r[i] = y[i]

    while True:
        rnorm = dnrm2(&m, &r[0], &INT_ONE)
        if rnorm <= residual_tol:
            status = OMP_TOL_STOP
            break
        if size >= kmax:
            status = OMP_TARGET_REACHED
            break
        if iterations >= max_iterations:
            status = OMP_STALLED
            break
        _mat_t_vec(a, r, corr)
        best = -1
        bestval = 0.0
        for j in range(n):
            if norms[j] == 0.0:
                continue
            val = fabs(corr[j]) / norms[j]
            if val > bestval:  # strict: first maximum wins, lowest index
                bestval = val
                best = j
        if best < 0 or selected[best]:
            status = OMP_STALLED
            break
        support[size] = best
        selected[best] = 1
        size += 1
        iterations += 1
        # normal equations on the support, Cholesky solve in place
        for i in range(size):
            si = support[i]
            for j in range(i, size):
                sj = support[j]
                val = ddot(&m, <double*>&a[0, si], &n, <double*>&a[0, sj], &n)
                gram[i + j * kmax] = val
                gram[j + i * kmax] = val
            coef[i] = ddot(&m, <double*>&a[0, si], &n, <double*>&y[0], &INT_ONE)
        info = 0
        dposv(&CHAR_L, &size, &INT_ONE, &gram[0], &kmax, &coef[0], &kmax, &info)
        if info != 0:
            return x_arr, iterations, OMP_RANK_DEFICIENT, True
        for j in range(n):
            x[j] = 0.0
        for i in range(size):
            x[support[i]] = coef[i]
        for i in range(m):
            r[i] = y[i]
        _mat_vec(a, x, r, -1.0, 1.0)
    return x_arr, iterations, status, False


cdef void _hard_threshold(double[::1] v, int k, double[::1] out,
                          unsigned char[::1] used) noexcept nogil:
    # keep the k largest |v[i]|, ties to the lowest index (scan-max passes)
    cdef int n = v.shape[0]
    cdef int i, j, best
    cdef double bestval
    if k >= n:
        for i in range(n):
            out[i] = v[i]
        return
    for i in range(n):
        out[i] = 0.0
        used[i] = 0
    for i in range(k):
        best = -1
        bestval = -1.0
        for j in range(n):
            if used[j]:
                continue
            if fabs(v[j]) > bestval:
                bestval = fabs(v[j])
                best = j
        used[best] = 1
        out[best] = v[best]


def hard_threshold(v, int k):
    """Keep the k largest-magnitude entries of v, ties to the lowest index."""
    cdef double[::1] vv = np.array(v, dtype=np.float64, copy=True)
    cdef int n = vv.shape[0]
    if k < 0:
        raise ValueError("k must be non-negative")
    out_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    used_arr = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] used = used_arr
    _hard_threshold(vv, k, out, used)
    return out_arr


def iht_kernel(const double[:, ::1] a, const double[::1] y, int k, bint fixed_step,
               double residual_tol, int max_iterations):
    """See pyref.iht_kernel; returns (x, iterations, status)."""
    cdef int m = a.shape[0], n = a.shape[1]
    cdef int status = IHT_MAX_ITERATIONS, iterations = 0
    cdef int t, i, has_support
    cdef double mu, num, den, change

    x_arr = np.zeros(n)
    cdef double[::1] x = x_arr
    cdef double[::1] r = np.empty(m)
    cdef double[::1] g = np.empty(n)
    cdef double[::1] gs = np.empty(n)
    cdef double[::1] ags = np.empty(m)
    cdef double[::1] v = np.empty(n)
    cdef double[::1] xnew = np.empty(n)
    cdef unsigned char[::1] used = np.empty(n, dtype=np.uint8)

    for t in range(1, max_iterations + 1):
        for i in range(m):
            r[i] = y[i]
        _mat_vec(a, x, r, -1.0, 1.0)      # r = y - A x
        _mat_t_vec(a, r, g)               # g = A' r
        if fixed_step:
            mu = 1.0
        else:
            has_support = 0
            for i in range(n):
                if x[i] != 0.0:
                    has_support = 1
                    break
            if has_support:
                for i in range(n):
                    gs[i] = g[i] if x[i] != 0.0 else 0.0
            else:
                for i in range(n):
                    gs[i] = g[i]
            num = ddot(&n, &gs[0], &INT_ONE, &gs[0], &INT_ONE)
            _mat_vec(a, gs, ags, 1.0, 0.0)
            den = ddot(&m, &ags[0], &INT_ONE, &ags[0], &INT_ONE)
            if den == 0.0:
                status = IHT_CONVERGED if num == 0.0 else IHT_STEP_BREAKDOWN
                break
            mu = num / den
        for i in range(n):
            v[i] = x[i] + mu * g[i]
        _hard_threshold(v, k, xnew, used)
        iterations = t
        for i in range(n):
            v[i] = xnew[i] - x[i]
        change = dnrm2(&n, &v[0], &INT_ONE)
        for i in range(n):
            x[i] = xnew[i]
        if change <= residual_tol:
            status = IHT_CONVERGED
            break
    return x_arr, iterations, status
