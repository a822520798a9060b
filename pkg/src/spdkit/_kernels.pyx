# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: Cholesky log-determinants, the S-divergence, pairwise
log-determinant tables for Gram matrices, and the Picard iteration for the
S-mean.

Every function here has a numpy twin in ``_fallback.py`` with the same
signature and semantics. Inputs must be C-contiguous float64.
"""

import numpy as np

from libc.math cimport log, sqrt, NAN
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy

NAME = "cython"


cdef int _chol(double* a, Py_ssize_t n) noexcept nogil:
    # In-place lower Cholesky; the strict upper triangle is left untouched.
    cdef Py_ssize_t i, j, k
    cdef double s, t
    for j in range(n):
        s = a[j * n + j]
        for k in range(j):
            s -= a[j * n + k] * a[j * n + k]
        if not s > 0.0:
            return -1
        s = sqrt(s)
        a[j * n + j] = s
        for i in range(j + 1, n):
            t = a[i * n + j]
            for k in range(j):
                t -= a[i * n + k] * a[j * n + k]
            a[i * n + j] = t / s
    return 0


cdef double _logdet_inplace(double* a, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0
    if _chol(a, n) != 0:
        return NAN
    for i in range(n):
        acc += log(a[i * n + i])
    return 2.0 * acc


cdef int _inv_spd(double* a, double* out, double* work, Py_ssize_t n) noexcept nogil:
    # out <- a^{-1} for SPD a; a is destroyed, work holds n*n doubles.
    cdef Py_ssize_t i, j, k
    cdef double s
    if _chol(a, n) != 0:
        return -1
    # work <- L^{-1}, lower triangular
    for i in range(n * n):
        work[i] = 0.0
    for j in range(n):
        work[j * n + j] = 1.0 / a[j * n + j]
        for i in range(j + 1, n):
            s = 0.0
            for k in range(j, i):
                s -= a[i * n + k] * work[k * n + j]
            work[i * n + j] = s / a[i * n + i]
    # out <- L^{-T} L^{-1}
    for i in range(n):
        for j in range(i + 1):
            s = 0.0
            for k in range(i, n):
                s += work[k * n + i] * work[k * n + j]
            out[i * n + j] = s
            out[j * n + i] = s
    return 0


def chol_logdet(const double[:, ::1] a):
    """log det of an SPD matrix via Cholesky; NaN when factorization fails."""
    cdef Py_ssize_t n = a.shape[0]
    cdef double* buf = <double*> malloc(n * n * sizeof(double))
    cdef double out
    if buf == NULL:
        raise MemoryError()
    memcpy(buf, &a[0, 0], n * n * sizeof(double))
    out = _logdet_inplace(buf, n)
    free(buf)
    return out


def s_div_raw(const double[:, ::1] x, const double[:, ::1] y):
    """Unclamped S-divergence from three Cholesky log-determinants."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i
    cdef double* buf = <double*> malloc(n * n * sizeof(double))
    cdef double ld_mid, ld_x, ld_y
    if buf == NULL:
        raise MemoryError()
    with nogil:
        for i in range(n * n):
            buf[i] = 0.5 * ((&x[0, 0])[i] + (&y[0, 0])[i])
        ld_mid = _logdet_inplace(buf, n)
        memcpy(buf, &x[0, 0], n * n * sizeof(double))
        ld_x = _logdet_inplace(buf, n)
        memcpy(buf, &y[0, 0], n * n * sizeof(double))
        ld_y = _logdet_inplace(buf, n)
    free(buf)
    return ld_mid - 0.5 * (ld_x + ld_y)


def pair_logdets(const double[:, :, ::1] stack):
    """Table of log det(X_i + X_j) over a stack of shape (m, n, n)."""
    cdef Py_ssize_t m = stack.shape[0]
    cdef Py_ssize_t n = stack.shape[1]
    cdef Py_ssize_t i, j, k
    out_arr = np.empty((m, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double* buf = <double*> malloc(n * n * sizeof(double))
    cdef double v
    if buf == NULL:
        raise MemoryError()
    with nogil:
        for i in range(m):
            for j in range(i, m):
                for k in range(n * n):
                    buf[k] = (&stack[i, 0, 0])[k] + (&stack[j, 0, 0])[k]
                v = _logdet_inplace(buf, n)
                out[i, j] = v
                out[j, i] = v
    free(buf)
    return out_arr


def spd_inverse(const double[:, ::1] a):
    """Inverse of an SPD matrix via Cholesky; None when factorization fails."""
    cdef Py_ssize_t n = a.shape[0]
    out_arr = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double* buf = <double*> malloc(2 * n * n * sizeof(double))
    cdef int status
    if buf == NULL:
        raise MemoryError()
    memcpy(buf, &a[0, 0], n * n * sizeof(double))
    with nogil:
        status = _inv_spd(buf, &out[0, 0], buf + n * n, n)
    free(buf)
    if status != 0:
        return None
    return out_arr


cdef double _fro_diff(double* a, double* b, Py_ssize_t nn) noexcept nogil:
    cdef Py_ssize_t i
    cdef double s = 0.0, d
    for i in range(nn):
        d = a[i] - b[i]
        s += d * d
    return sqrt(s)


cdef double _fro(double* a, Py_ssize_t nn) noexcept nogil:
    cdef Py_ssize_t i
    cdef double s = 0.0
    for i in range(nn):
        s += a[i] * a[i]
    return sqrt(s)


def picard(const double[:, :, ::1] mats, const double[::1] weights, const double[:, ::1] x0,
           double tol, double res_tol, Py_ssize_t max_iters):
    """Fixed-point iteration X <- [sum_i w_i ((X + A_i)/2)^{-1}]^{-1}.

    Stops once the relative Frobenius step is <= ``tol`` and the stationarity
    residual at the previous iterate is <= ``res_tol * max(1, ||X||_F)``.

    Returns ``(X, iterations, steps, converged, status)``; ``status`` is
    nonzero when a Cholesky factorization broke down.
    """
    cdef Py_ssize_t m = mats.shape[0]
    cdef Py_ssize_t n = mats.shape[1]
    cdef Py_ssize_t nn = n * n
    cdef Py_ssize_t i, k, it = 0
    cdef int status = 0, converged = 0
    cdef double step, res, xnorm
    steps_arr = np.zeros(max_iters, dtype=np.float64)
    cdef double[::1] steps = steps_arr
    x_arr = np.array(x0, dtype=np.float64, copy=True)
    cdef double[:, ::1] xv = x_arr
    cdef double* x = &xv[0, 0]
    cdef double* mem = <double*> malloc(6 * nn * sizeof(double))
    if mem == NULL:
        raise MemoryError()
    cdef double* yprev = mem
    cdef double* y = mem + nn
    cdef double* tmp = mem + 2 * nn
    cdef double* inv = mem + 3 * nn
    cdef double* work = mem + 4 * nn
    cdef double* xnew = mem + 5 * nn
    with nogil:
        memcpy(tmp, x, nn * sizeof(double))
        if _inv_spd(tmp, yprev, work, n) != 0:
            status = 1
        while status == 0 and it < max_iters:
            for i in range(nn):
                y[i] = 0.0
            for k in range(m):
                for i in range(nn):
                    tmp[i] = x[i] + (&mats[k, 0, 0])[i]
                if _inv_spd(tmp, inv, work, n) != 0:
                    status = 2
                    break
                for i in range(nn):
                    y[i] += 2.0 * weights[k] * inv[i]
            if status != 0:
                break
            res = 0.5 * _fro_diff(yprev, y, nn)
            memcpy(tmp, y, nn * sizeof(double))
            if _inv_spd(tmp, xnew, work, n) != 0:
                status = 3
                break
            xnorm = _fro(x, nn)
            step = _fro_diff(xnew, x, nn) / xnorm
            steps[it] = step
            it += 1
            memcpy(x, xnew, nn * sizeof(double))
            memcpy(yprev, y, nn * sizeof(double))
            if step <= tol and res <= res_tol * (xnorm if xnorm > 1.0 else 1.0):
                converged = 1
                break
    free(mem)
    return x_arr, it, steps_arr[:it].copy(), bool(converged), status
