"""Synthetic ill-posed least-squares problems and the optimal-lambda oracle.

Rows of the raw matrix are drawn from N(1_d, Gamma) with
Gamma_ij = 5 * 0.9^|i-j|; its singular values are then replaced by a chosen
profile scaled to a target condition number. Profiles are specified in log
space: sigma_i = kappa^(-t_i) with t_1 = 0 <= t_i <= t_r = 1, so
sigma_1 = 1 and sigma_1 / sigma_r = kappa exactly.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from mihs.errors import ParameterError
from mihs.linalg import child_seed, compact_svd, make_rng
from mihs.mmio import read_matrix, read_vector, write_matrix, write_vector


@dataclass
class Problem:
    A: np.ndarray
    b: np.ndarray
    x_true: Optional[np.ndarray] = None
    lam: float = 0.0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        if self.A.ndim != 2:
            raise ParameterError("A must be a matrix")
        if self.b.shape != (self.A.shape[0],):
            raise ParameterError(f"b has shape {self.b.shape}, expected ({self.A.shape[0]},)")
        if self.x_true is not None:
            self.x_true = np.asarray(self.x_true, dtype=float)
            if self.x_true.shape != (self.A.shape[1],):
                raise ParameterError("x_true length must equal the number of columns of A")
        if not self.lam >= 0:
            raise ParameterError("lam must be nonnegative")

    @property
    def shape(self):
        return self.A.shape

    def with_lambda(self, lam: float) -> "Problem":
        return Problem(self.A, self.b, self.x_true, lam, dict(self.metadata, lam=lam))

    def solution(self, lam: float | None = None) -> np.ndarray:
        """Dense oracle x* = argmin ||Ax - b||^2 + lam ||x||^2 (via the SVD)."""
        lam = self.lam if lam is None else lam
        U, s, V = compact_svd(self.A)
        c = U.T @ self.b
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(s * s + lam > 0, s / (s * s + lam), 0.0)
        return V @ (w * c)


@dataclass(frozen=True)
class SingularProfile:
    """Shape of the singular spectrum.

    kind is one of ``geometric`` (log-linear decay), ``philips`` (slow then fast
    decay, t = 0.3u + 0.7u^2 in log space), ``heat`` (algebraic decay i^-p, which
    is much slower at the tail) or ``file`` (explicit values, reshaped in log
    space to the requested condition number).
    """
    kind: str = "geometric"
    values: Optional[tuple] = None

    @classmethod
    def geometric(cls):
        return cls("geometric")

    @classmethod
    def philips_like(cls):
        return cls("philips")

    @classmethod
    def heat_like(cls):
        return cls("heat")

    @classmethod
    def from_values(cls, values):
        return cls("file", tuple(float(v) for v in np.ravel(values)))

    @classmethod
    def from_file(cls, path):
        return cls.from_values(read_vector(path))

    def singular_values(self, r: int, kappa: float) -> np.ndarray:
        if kappa < 1:
            raise ParameterError("kappa must be >= 1")
        if r < 1:
            raise ParameterError("need at least one singular value")
        u = np.linspace(0.0, 1.0, r) if r > 1 else np.zeros(1)
        if self.kind == "geometric":
            t = u
        elif self.kind == "philips":
            t = 0.3 * u + 0.7 * u * u
        elif self.kind == "heat":
            i = np.arange(1, r + 1, dtype=float)
            t = np.log(i) / math.log(r) if r > 1 else np.zeros(1)
        elif self.kind == "file":
            vals = np.sort(np.asarray(self.values or (), dtype=float))[::-1]
            if vals.size < r:
                raise ParameterError(f"profile has {vals.size} values, need {r}")
            vals = vals[:r]
            if vals[-1] <= 0:
                raise ParameterError("profile values must be positive")
            spread = math.log(vals[0] / vals[-1])
            if spread == 0:
                if kappa != 1:
                    raise ParameterError("constant profile cannot reach kappa > 1")
                t = np.zeros(r)
            else:
                t = np.log(vals[0] / vals) / spread
        else:
            raise ParameterError(f"unknown profile {self.kind!r}")
        sigma = np.exp(-math.log(kappa) * t)
        sigma[0], sigma[-1] = 1.0, 1.0 / kappa
        return sigma


def smooth_signal(d: int) -> np.ndarray:
    """Default x_true: sin(pi t) + 0.5 sin(3 pi t) on t in [0, 1]."""
    t = np.linspace(0.0, 1.0, d)
    return np.sin(np.pi * t) + 0.5 * np.sin(3.0 * np.pi * t)


def correlated_rows(n: int, d: int, rng) -> np.ndarray:
    """n samples of N(1_d, Gamma), Gamma_ij = 5 * 0.9^|i-j|."""
    idx = np.arange(d)
    gamma = 5.0 * 0.9 ** np.abs(idx[:, None] - idx[None, :])
    L = np.linalg.cholesky(gamma)
    return 1.0 + rng.standard_normal((n, d)) @ L.T


def generate_problem(n: int, d: int, profile: SingularProfile | str = "geometric",
                     kappa: float = 1e4, noise_level: float = 0.01, seed: int = 0,
                     uniform_x: bool = False, lam: float = 0.0) -> Problem:
    """Build A with the given spectrum, x_true, and b = A x_true + noise.

    The noise is Gaussian, rescaled so that ||noise|| / ||A x_true|| equals
    ``noise_level`` exactly. Matrix, signal and noise use separate child seeds.
    """
    if n < 2 or d < 2:
        raise ParameterError("n and d must be >= 2")
    if noise_level < 0:
        raise ParameterError("noise_level must be nonnegative")
    if isinstance(profile, str):
        profile = SingularProfile(profile)
    r = min(n, d)
    sigma = profile.singular_values(r, kappa)

    X = correlated_rows(n, d, make_rng(child_seed(seed, 0)))
    U, _, V = compact_svd(X)
    A = (U * sigma) @ V.T

    if uniform_x:
        x_true = make_rng(child_seed(seed, 1)).uniform(-1.0, 1.0, d)
    else:
        x_true = smooth_signal(d)
    b0 = A @ x_true
    if noise_level > 0:
        w = make_rng(child_seed(seed, 2)).standard_normal(n)
        b = b0 + w * (noise_level * np.linalg.norm(b0) / np.linalg.norm(w))
    else:
        b = b0
    meta = dict(n=n, d=d, profile=profile.kind, kappa=float(kappa),
                noise_level=float(noise_level), seed=int(seed), uniform_x=bool(uniform_x),
                lam=float(lam))
    return Problem(A, b, x_true, float(lam), meta)


def lambda_error_curve(problem: Problem):
    """Return f(lam) = ||x*(lam) - x_true|| evaluated in the SVD basis, and sigma."""
    if problem.x_true is None:
        raise ParameterError("optimal_lambda needs x_true")
    U, s, V = compact_svd(problem.A)
    c = U.T @ problem.b
    xt = V.T @ problem.x_true
    perp2 = max(float(problem.x_true @ problem.x_true - xt @ xt), 0.0)

    def err(lam):
        x = s * c / (s * s + lam)
        return math.sqrt(float(np.sum((x - xt) ** 2)) + perp2)
    return err, s


def optimal_lambda(problem: Problem, rel_tol: float = 1e-3, grid: int = 121) -> float:
    """argmin_lam ||x*(lam) - x_true|| over lam in [sigma_r^2 1e-3, sigma_1^2 1e3].

    A log-spaced grid locates the basin, then a bounded Brent search
    (golden-section with parabolic steps) refines log(lam) to ``rel_tol``.
    """
    err, s = lambda_error_curve(problem)
    s_pos = s[s > 0]
    lo = math.log(s_pos[-1] ** 2 * 1e-3)
    hi = math.log(s_pos[0] ** 2 * 1e3)
    logs = np.linspace(lo, hi, grid)
    vals = np.array([err(math.exp(t)) for t in logs])
    k = int(np.argmin(vals))
    if k == 0 and vals[1] >= vals[0]:
        a, c = logs[0], logs[1]
    elif k == grid - 1:
        a, c = logs[-2], logs[-1]
    else:
        a, c = logs[max(k - 1, 0)], logs[min(k + 1, grid - 1)]
    res = minimize_scalar(lambda t: err(math.exp(t)), bounds=(a, c), method="bounded",
                          options={"xatol": math.log1p(rel_tol) / 4})
    best = res.x if err(math.exp(res.x)) <= vals[k] else logs[k]
    return float(math.exp(best))


# -- persistence -------------------------------------------------------------

def save_problem(directory, problem: Problem, stem: str = "problem") -> dict:
    """Write A, b, x_true (.mtx) and a JSON sidecar; returns the sidecar dict."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = {"A": f"{stem}_A.mtx", "b": f"{stem}_b.mtx"}
    write_matrix(directory / files["A"], problem.A)
    write_vector(directory / files["b"], problem.b)
    if problem.x_true is not None:
        files["x_true"] = f"{stem}_x_true.mtx"
        write_vector(directory / files["x_true"], problem.x_true)
    meta = dict(problem.metadata, lam=float(problem.lam), files=files)
    (directory / f"{stem}.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return meta


def load_problem(sidecar) -> Problem:
    """Load a problem from its JSON sidecar written by :func:`save_problem`."""
    sidecar = Path(sidecar)
    meta = json.loads(sidecar.read_text())
    files = meta.get("files", {})
    base = sidecar.parent
    A = read_matrix(base / files["A"])
    b = read_vector(base / files["b"])
    x_true = read_vector(base / files["x_true"]) if "x_true" in files else None
    return Problem(A, b, x_true, float(meta.get("lam", 0.0)), meta)
