# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_fallback.py`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, isfinite
from scipy.linalg.cython_blas cimport dgemv, ddot, dcopy

cnp.import_array()

STATUS_CONVERGED = 0
STATUS_MAX_ITER = 1
STATUS_BREAKDOWN = 2


def scatter_rows(const cnp.int64_t[:, ::1] rows, const double[:, ::1] vals,
                 const double[:, ::1] M, Py_ssize_t m):
    cdef Py_ssize_t n = M.shape[0], d = M.shape[1], s = rows.shape[1]
    cdef Py_ssize_t i, k, j, r
    cdef double a
    out = np.zeros((m, d))
    cdef double[:, ::1] o = out
    for i in range(n):
        for k in range(s):
            r = rows[i, k]
            a = vals[i, k]
            for j in range(d):
                o[r, j] += a * M[i, j]
    return out


def fwht_rows(double[:, ::1] X):
    cdef Py_ssize_t N = X.shape[0], d = X.shape[1]
    cdef Py_ssize_t h = 1, i, j, c
    cdef double a, b
    while h < N:
        i = 0
        while i < N:
            for j in range(i, i + h):
                for c in range(d):
                    a = X[j, c]
                    b = X[j + h, c]
                    X[j, c] = a + b
                    X[j + h, c] = a - b
            i += 2 * h
        h *= 2
    return np.asarray(X)


cdef inline double _norm(int n, double* x) nogil:
    cdef int one = 1
    return sqrt(ddot(&n, x, &one, x, &one))


def aab_core(const double[:, ::1] A, const double[::1] b, double lam, double eps,
             Py_ssize_t max_iter, double tiny):
    # A is row-major m x n, i.e. column-major n x m with lda = n
    cdef int m = <int>A.shape[0], n = <int>A.shape[1]
    cdef int one = 1, lda = n if n > 0 else 1
    cdef char tr_n = b'N', tr_t = b'T'
    cdef double done = 1.0, dzero = 0.0, beta_
    cdef double* Ap = <double*>&A[0, 0]
    cdef Py_ssize_t iters = 0, n_theta = 0, n_rho = 0, i
    cdef double theta1, rho, theta, rhobar, thetabar, lambar, c, s, phi, relres, scale
    cdef double best_res = 1.0 / 0.0

    x_arr = np.zeros(n)
    cdef double[::1] x = x_arr
    theta1 = _norm(n, <double*>&b[0])
    if theta1 == 0.0:
        return x_arr, 0, 0.0, 0, 0, STATUS_CONVERGED

    v_arr = np.empty(n)
    d_arr = np.empty(n)
    wn_arr = np.empty(n)
    p_arr = np.empty(m)
    wm_arr = np.empty(m)
    best_arr = np.zeros(n)
    cdef double[::1] v = v_arr, dd = d_arr, wn = wn_arr, p = p_arr, wm = wm_arr
    cdef double[::1] xb = best_arr

    for i in range(n):
        v[i] = b[i] / theta1
    # wm = A v
    dgemv(&tr_t, &n, &m, &done, Ap, &lda, &v[0], &one, &dzero, &wm[0], &one)
    rho = _norm(m, &wm[0])
    n_rho = 1
    scale = theta1 if theta1 > rho else rho
    if rho <= tiny * scale:
        rho = 0.0
        for i in range(m):
            p[i] = 0.0
    else:
        for i in range(m):
            p[i] = wm[i] / rho
    rhobar = sqrt(rho * rho + lam)
    if rhobar == 0.0:
        return x_arr, 0, 1.0, 0, n_rho, STATUS_BREAKDOWN
    c = rho / rhobar
    s = sqrt(lam) / rhobar
    phi = theta1 / rhobar
    for i in range(n):
        dd[i] = v[i] / rhobar
        x[i] = phi * dd[i]
    iters = 1
    while True:
        # wn = A^T p - rho v
        dcopy(&n, &v[0], &one, &wn[0], &one)
        beta_ = -rho
        dgemv(&tr_n, &n, &m, &done, Ap, &lda, &p[0], &one, &beta_, &wn[0], &one)
        theta = _norm(n, &wn[0])
        n_theta += 1
        thetabar = c * theta
        relres = fabs(phi * thetabar) / theta1
        if relres < eps:
            return x_arr, iters, relres, n_theta, n_rho, STATUS_CONVERGED
        if not isfinite(relres):
            return best_arr, iters, best_res, n_theta, n_rho, STATUS_BREAKDOWN
        if relres < best_res:
            best_res = relres
            dcopy(&n, &x[0], &one, &xb[0], &one)
        if theta <= tiny * scale:
            return x_arr, iters, relres, n_theta, n_rho, STATUS_BREAKDOWN
        if iters >= max_iter:
            return best_arr, iters, best_res, n_theta, n_rho, STATUS_MAX_ITER
        if theta > scale:
            scale = theta
        for i in range(n):
            v[i] = wn[i] / theta
        # wm = A v - theta p
        dcopy(&m, &p[0], &one, &wm[0], &one)
        beta_ = -theta
        dgemv(&tr_t, &n, &m, &done, Ap, &lda, &v[0], &one, &beta_, &wm[0], &one)
        rho = _norm(m, &wm[0])
        n_rho += 1
        if rho <= tiny * scale:
            rho = 0.0
            for i in range(m):
                p[i] = 0.0
        else:
            if rho > scale:
                scale = rho
            for i in range(m):
                p[i] = wm[i] / rho
        lambar = sqrt(lam + (s * theta) * (s * theta))
        rhobar = sqrt(rho * rho + lambar * lambar)
        if rhobar == 0.0:
            return x_arr, iters, relres, n_theta, n_rho, STATUS_BREAKDOWN
        c = rho / rhobar
        s = lambar / rhobar
        phi = -phi * thetabar / rhobar
        for i in range(n):
            dd[i] = (v[i] - thetabar * dd[i]) / rhobar
            x[i] = x[i] + phi * dd[i]
        iters += 1
