"""Random embeddings S (m x n) with E[S^T S] = I_n and their fast application.

Four families are supported: CountSketch (one +-1 per column), OSNAP (s entries
of +-1/sqrt(s) per column in distinct rows), SRHT (random signs, orthonormal
Walsh-Hadamard transform on the zero-padded rows, uniform row sampling) and
dense Gaussian. An identity "sketch" is included for tests and sanity runs.

A ``SketchOperator`` is fully determined by ``(kind, n, m, seed)``; the payload
is regenerated on demand and never serialized.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from mihs import _backend
from mihs.errors import ParameterError
from mihs.flops import SKETCH, FlopCounter
from mihs.linalg import make_rng


class SketchKind(str, Enum):
    COUNT_SKETCH = "countsketch"
    OSNAP = "osnap"
    SRHT = "srht"
    GAUSSIAN = "gaussian"
    IDENTITY = "identity"


@dataclass(frozen=True)
class SketchOperator:
    kind: SketchKind
    m: int
    n: int
    seed: int
    s: int = 1
    # CountSketch/OSNAP: (rows, vals) each n x s ; SRHT: (signs, picked, n_pad)
    # Gaussian: dense (m, n) matrix
    payload: tuple = field(repr=False, compare=False, default=())

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "m": self.m, "n": self.n, "seed": self.seed, "s": self.s}

    @classmethod
    def from_dict(cls, data: dict) -> "SketchOperator":
        return build_sketch(data["kind"], data["n"], data["m"], data["seed"], s=data.get("s", 1))

    def dense(self) -> np.ndarray:
        """Explicit S; test and debugging use only."""
        return apply_sketch(self, np.eye(self.n))

    def __matmul__(self, M):
        return apply_sketch(self, M)


def build_sketch(kind, n: int, m: int, seed: int, s: int = 1) -> SketchOperator:
    """Draw the sketch of the given kind; deterministic in (kind, n, m, seed, s)."""
    kind = SketchKind(kind)
    if m < 1 or n < 1:
        raise ParameterError("sketch dimensions must be >= 1")
    rng = make_rng(seed)
    if kind is SketchKind.COUNT_SKETCH:
        rows = rng.integers(0, m, size=(n, 1), dtype=np.int64)
        vals = rng.choice(np.array([-1.0, 1.0]), size=(n, 1))
        return SketchOperator(kind, m, n, seed, 1, (rows, vals))
    if kind is SketchKind.OSNAP:
        if s < 1:
            raise ParameterError("OSNAP needs s >= 1 nonzeros per column")
        if s > m:
            raise ParameterError(f"OSNAP with s={s} > m={m}")
        rows = _distinct_rows(rng, n, m, s)
        vals = rng.choice(np.array([-1.0, 1.0]), size=(n, s)) / math.sqrt(s)
        return SketchOperator(kind, m, n, seed, s, (rows, vals))
    if kind is SketchKind.SRHT:
        if m > n:
            raise ParameterError(f"SRHT samples rows: need m <= n, got m={m}, n={n}")
        n_pad = 1 << max(n - 1, 0).bit_length()
        signs = rng.choice(np.array([-1.0, 1.0]), size=n)
        picked = np.sort(rng.choice(n_pad, size=m, replace=False))
        return SketchOperator(kind, m, n, seed, 1, (signs, picked, n_pad))
    if kind is SketchKind.GAUSSIAN:
        G = rng.standard_normal((m, n)) / math.sqrt(m)
        return SketchOperator(kind, m, n, seed, 1, (G,))
    if m != n:
        raise ParameterError("identity sketch needs m == n")
    return SketchOperator(kind, m, n, seed, 1, ())


def _distinct_rows(rng: np.random.Generator, n: int, m: int, s: int) -> np.ndarray:
    """s distinct row indices per column; dense permutation draw when s is large."""
    if s == 1:
        return rng.integers(0, m, size=(n, 1), dtype=np.int64)
    if 2 * s > m:
        keys = rng.random((n, m))
        return np.argsort(keys, axis=1)[:, :s].astype(np.int64)
    rows = rng.integers(0, m, size=(n, s), dtype=np.int64)
    while True:
        srt = np.sort(rows, axis=1)
        bad = np.flatnonzero((srt[:, 1:] == srt[:, :-1]).any(axis=1))
        if bad.size == 0:
            return rows
        rows[bad] = rng.integers(0, m, size=(bad.size, s), dtype=np.int64)


def apply_sketch(S: SketchOperator, M, flops: FlopCounter | None = None,
                 backend: str | None = None) -> np.ndarray:
    """Return ``S @ M`` for a dense n x d (or length-n) ``M``.

    Charged flops per kind: CountSketch 2 nnz(M), OSNAP 2 s nnz(M), Gaussian
    2 m n d, SRHT n d (signs) + n_pad log2(n_pad) d (transform) + m d (scaling).
    """
    M = np.asarray(M, dtype=float)
    vec = M.ndim == 1
    if vec:
        M = M[:, None]
    if M.ndim != 2 or M.shape[0] != S.n:
        raise ParameterError(f"sketch has n={S.n} columns but M has shape {M.shape}")
    d = M.shape[1]
    kind = S.kind
    if kind in (SketchKind.COUNT_SKETCH, SketchKind.OSNAP):
        rows, vals = S.payload
        out = _backend.get("scatter_rows", backend)(rows, vals, np.ascontiguousarray(M), S.m)
        if flops is not None:
            flops.charge(SKETCH, 2 * S.s * int(np.count_nonzero(M)))
    elif kind is SketchKind.SRHT:
        signs, picked, n_pad = S.payload
        X = np.zeros((n_pad, d))
        X[: S.n] = signs[:, None] * M
        _backend.get("fwht_rows", backend)(X)
        out = X[picked] * (1.0 / math.sqrt(S.m))
        if flops is not None:
            flops.charge(SKETCH, S.n * d + n_pad * int(math.log2(n_pad)) * d + S.m * d)
    elif kind is SketchKind.GAUSSIAN:
        out = S.payload[0] @ M
        if flops is not None:
            flops.charge(SKETCH, 2 * S.m * S.n * d)
    else:
        out = M.copy()
    return out[:, 0] if vec else out


def recommended_sketch_size(kind, sd: float, eps: float, delta: float, c: float = 1.0,
                            base: float = math.e) -> int:
    """Sketch size ``ceil(c * f(sd, eps, delta))`` for the subspace-embedding condition.

    f is sd^2/(eps^2 delta) for CountSketch, base*sd*ln(sd/delta)/eps^2 for OSNAP,
    (sd + ln(1/(eps delta)) ln(sd/delta))/eps^2 for SRHT and sd/eps^2 for Gaussian.
    Only the asymptotic order is known, hence the user constant ``c``.
    """
    kind = SketchKind(kind)
    if not 0 < eps < 1:
        raise ParameterError("eps must lie in (0, 1)")
    if not 0 < delta <= 0.5:
        raise ParameterError("delta must lie in (0, 1/2]")
    if sd < 1:
        raise ParameterError("sd must be >= 1")
    if c <= 0:
        raise ParameterError("c must be positive")
    if kind is SketchKind.COUNT_SKETCH:
        f = sd * sd / (eps * eps * delta)
    elif kind is SketchKind.OSNAP:
        f = base * sd * math.log(sd / delta) / (eps * eps)
    elif kind is SketchKind.SRHT:
        f = (sd + math.log(1.0 / (eps * delta)) * math.log(sd / delta)) / (eps * eps)
    elif kind is SketchKind.GAUSSIAN:
        f = sd / (eps * eps)
    else:
        raise ParameterError("no size rule for the identity sketch")
    return max(1, math.ceil(c * f - 1e-9))


def recommended_osnap_sparsity(sd: float, eps: float, delta: float, c: float = 1.0,
                               base: float = math.e) -> int:
    """Nonzeros per column ``ceil(c * log_base(sd/delta) / eps)`` for OSNAP."""
    if base <= 2:
        raise ParameterError("OSNAP base must exceed 2")
    return max(1, math.ceil(c * math.log(sd / delta, base) / eps))
