"""NumPy implementations of the hot kernels.

These mirror ``_kernels.pyx`` operation for operation and are used whenever the
compiled extension is unavailable or ``MIHS_PURE_PYTHON=1`` is set.
"""
from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

STATUS_CONVERGED = 0
STATUS_MAX_ITER = 1
STATUS_BREAKDOWN = 2


def scatter_rows(rows, vals, M, m):
    """out[rows[i, k]] += vals[i, k] * M[i] for every source row i."""
    n, s = rows.shape
    cols = np.repeat(np.arange(n), s)
    S = sp.csr_matrix((vals.ravel(), (rows.ravel(), cols)), shape=(m, n))
    return np.ascontiguousarray(S @ M)


def fwht_rows(X):
    """In-place unnormalized Walsh-Hadamard transform along axis 0."""
    N, d = X.shape
    h = 1
    while h < N:
        Y = X.reshape(N // (2 * h), 2, h, d)
        a = Y[:, 0].copy()
        Y[:, 0] += Y[:, 1]
        Y[:, 1] = a - Y[:, 1]
        h *= 2
    return X


def aab_core(A, b, lam, eps, max_iter, tiny, callback=None):
    """Bidiagonalization loop for (A^T A + lam I) x = b.

    Returns ``(x, iters, relres, n_theta, n_rho, status)``; ``relres`` is the
    recurrence residual of the returned ``x``. When the cap is hit, or the
    residual stops being finite, the iterate with the smallest residual seen is
    returned. ``A`` may be any object that supports ``A @ v`` and ``A.T @ p``.
    """
    n = b.shape[0]
    theta1 = math.sqrt(float(b @ b))
    x = np.zeros(n)
    if theta1 == 0.0:
        return x, 0, 0.0, 0, 0, STATUS_CONVERGED
    v = b / theta1
    w = A @ v
    rho = math.sqrt(float(w @ w))
    n_rho = 1
    scale = max(theta1, rho)
    if rho <= tiny * scale:
        rho = 0.0
        p = np.zeros_like(w)
    else:
        p = w / rho
    rhobar = math.sqrt(rho * rho + lam)
    if rhobar == 0.0:
        return x, 0, 1.0, 0, n_rho, STATUS_BREAKDOWN
    c = rho / rhobar
    s = math.sqrt(lam) / rhobar
    phi = theta1 / rhobar
    d = v / rhobar
    x = phi * d
    iters = 1
    n_theta = 0
    best_x, best_res = x, math.inf
    while True:
        w = A.T @ p - rho * v
        theta = math.sqrt(float(w @ w))
        n_theta += 1
        thetabar = c * theta
        relres = abs(phi * thetabar) / theta1
        if callback is not None:
            callback(dict(iter=iters, v=v, p=p, d=d, x=x, rho=rho, theta=theta,
                          rhobar=rhobar, thetabar=thetabar, c=c, s=s, phi=phi,
                          theta1=theta1, relres=relres))
        if relres < eps:
            return x, iters, relres, n_theta, n_rho, STATUS_CONVERGED
        if not math.isfinite(relres):
            return best_x, iters, best_res, n_theta, n_rho, STATUS_BREAKDOWN
        if relres < best_res:
            best_x, best_res = x, relres
        if theta <= tiny * scale:
            # invariant Krylov space: the projected solution is exact
            return x, iters, relres, n_theta, n_rho, STATUS_BREAKDOWN
        if iters >= max_iter:
            return best_x, iters, best_res, n_theta, n_rho, STATUS_MAX_ITER
        scale = max(scale, theta)
        v = w / theta
        w = A @ v - theta * p
        rho = math.sqrt(float(w @ w))
        n_rho += 1
        if rho <= tiny * scale:
            rho = 0.0
            p = np.zeros_like(w)
        else:
            scale = max(scale, rho)
            p = w / rho
        lambar = math.sqrt(lam + (s * theta) ** 2)
        rhobar = math.sqrt(rho * rho + lambar * lambar)
        if rhobar == 0.0:
            return x, iters, relres, n_theta, n_rho, STATUS_BREAKDOWN
        c = rho / rhobar
        s = lambar / rhobar
        d = (v - thetabar * d) / rhobar
        phi = -phi * thetabar / rhobar
        x = x + phi * d
        iters += 1
