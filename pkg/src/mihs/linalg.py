"""Small dense kernels: QR R-factor, compact SVD, Givens rotations, seeding.

Matrices are plain row-major ``numpy`` arrays. The factorizations here are only
used by the exact schemes and by test oracles; the scalable paths never call
them.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np


class CompactSVD(NamedTuple):
    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray


def qr_r_factor(M: np.ndarray) -> np.ndarray:
    """Upper-triangular R with ``M.T @ M == R.T @ R`` and a nonnegative diagonal.

    Rank-deficient input is not an error: R simply carries (near) zero diagonal
    entries and the caller decides how to regularize.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] < M.shape[1]:
        raise ValueError(f"qr_r_factor needs a tall matrix, got shape {M.shape}")
    R = np.linalg.qr(M, mode="r")
    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    return R * signs[:, None]


def compact_svd(M: np.ndarray) -> CompactSVD:
    """Thin SVD with r = min(rows, cols) singular triplets in descending order."""
    U, s, Vt = np.linalg.svd(np.asarray(M, dtype=float), full_matrices=False)
    return CompactSVD(U, s, Vt.T)


def givens(a: float, b: float) -> tuple[float, float, float]:
    """Rotation (c, s) with ``c*a + s*b = r >= 0`` and ``-s*a + c*b = 0``."""
    if a == 0.0 and b == 0.0:
        return 1.0, 0.0, 0.0
    # scale first so subnormal inputs keep full precision in c and s
    scale = max(abs(a), abs(b))
    an, bn = a / scale, b / scale
    rn = math.hypot(an, bn)
    return an / rn, bn / rn, rn * scale


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator; equal seeds give bit-identical streams on every platform."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(_as_entropy(seed))))


def child_seed(seed: int, *index: int) -> int:
    """Deterministic 64-bit child seed for (seed, index...) e.g. (seed, trial)."""
    ss = np.random.SeedSequence(_as_entropy(seed), spawn_key=tuple(int(i) for i in index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _as_entropy(seed) -> int:
    if seed is None:
        raise ValueError("an explicit integer seed is required")
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    return seed


def dinv_seminorm(e: np.ndarray, V: np.ndarray, sigma: np.ndarray, lam: float) -> float:
    """Weighted norm ||diag(sqrt(sigma^2 + lam)) V^T e||_2 used in contraction checks."""
    w = np.sqrt(np.asarray(sigma) ** 2 + lam)
    return float(np.linalg.norm(w * (V.T @ e)))
