"""Momentum Iterative Hessian Sketch solvers for min ||Ax - b||^2 + lam ||x||^2.

All variants keep one sketch for the whole run and take heavy-ball steps

    y+ = y + alpha * dy + beta * (y - y_prev),

where ``dy`` solves the sketched Newton system ((SB)^T SB + lam I) dy = -grad.
``B`` is ``A`` for the primal solver (n >= d) and ``A^T`` for the dual solver
(n <= d). The primal-dual variants solve that sub-problem through its own dual,
sketched a second time, with an inner heavy-ball loop.

Sub-problems are solved either exactly (R factor of [SB; sqrt(lam) I], computed
once) or inexactly with :func:`mihs.subsolver.aab_solve` at a constant forcing
term ``eps_sub``. Every solver returns a :class:`SolveReport` whose records hold
error, residual and cumulative flops per outer iteration.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.linalg import solve_triangular

from mihs.errors import ParameterError
from mihs.flops import FACTOR, MATVEC, SUBSOLVER, VECTOR, FlopCounter, householder_r_flops
from mihs.linalg import child_seed, qr_r_factor
from mihs.sketch import SketchKind, apply_sketch, build_sketch
from mihs.subsolver import MAX_ITER, aab_solve, default_max_iter

EXACT = "exact"
INEXACT = "inexact"


# -- momentum parameters ----------------------------------------------------

@dataclass(frozen=True)
class MomentumParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ParameterError(f"alpha={self.alpha} outside (0, 1]")
        if not 0.0 <= self.beta < 1.0:
            raise ParameterError(f"beta={self.beta} outside [0, 1)")

    @property
    def rate(self) -> float:
        """Predicted contraction factor sqrt(beta)."""
        return math.sqrt(self.beta)


@dataclass(frozen=True)
class Theoretical:
    """Rule tag: parameters from a known embedding quality ``eps``."""
    eps: float


@dataclass(frozen=True)
class Empirical:
    """Rule tag: parameters from a statistical dimension ``sd``."""
    sd: float


def momentum_theoretical(eps: float) -> MomentumParams:
    """Optimal fixed heavy-ball parameters for an eps-subspace embedding.

    beta = ((sqrt(1+eps) - sqrt(1-eps)) / (sqrt(1+eps) + sqrt(1-eps)))^2, which
    equals (eps / (1 + sqrt(1 - eps^2)))^2, and alpha = (1 - beta) sqrt(1 - eps^2).
    """
    if not 0.0 < eps < 1.0:
        raise ParameterError("eps must lie in (0, 1)")
    p, q = math.sqrt(1.0 + eps), math.sqrt(1.0 - eps)
    beta = ((p - q) / (p + q)) ** 2
    return MomentumParams((1.0 - beta) * math.sqrt(1.0 - eps * eps), beta)


def theoretical_rate(eps: float) -> float:
    return eps / (1.0 + math.sqrt(1.0 - eps * eps))


def momentum_empirical(sd: float, m: int) -> MomentumParams:
    """beta = sd/m, alpha = (1 - beta)^2; the iteration then contracts at sqrt(beta)."""
    if not 0.0 < sd < m:
        raise ParameterError(f"need 0 < sd < m, got sd={sd}, m={m}")
    beta = sd / m
    return MomentumParams((1.0 - beta) ** 2, beta)


def iteration_bound(eta: float, eps: float, C: float = 1.0, mode: str = "quotient") -> int:
    """Outer iterations needed for an eta-accurate solution.

    ``mode="quotient"`` computes ceil((ln eta - ln C) / ln rate) with
    rate = eps / (1 + sqrt(1 - eps^2)). ``mode="literal"`` evaluates
    ceil(ln(eta) ln(C) / ln(rate)); for C = 1 the constant is dropped and both
    modes reduce to ceil(ln eta / ln rate).
    """
    if not 0.0 < eta < 1.0:
        raise ParameterError("eta must lie in (0, 1)")
    if not 0.0 < eps < 0.5:
        raise ParameterError("eps must lie in (0, 1/2)")
    if C < 1.0:
        raise ParameterError("C must be >= 1")
    log_rate = math.log(eps) - math.log(1.0 + math.sqrt(1.0 - eps * eps))
    if C == 1.0:
        num = math.log(eta)
    elif mode == "quotient":
        num = math.log(eta) - math.log(C)
    elif mode == "literal":
        num = math.log(eta) * math.log(C)
    else:
        raise ParameterError(f"unknown mode {mode!r}")
    return max(1, math.ceil(num / log_rate - 1e-12))


# -- configuration and reports ----------------------------------------------

MomentumSpec = Union[MomentumParams, Theoretical, Empirical]


@dataclass
class SolverConfig:
    m: int
    sketch: SketchKind = SketchKind.GAUSSIAN
    momentum: Optional[MomentumSpec] = None
    iters: int = 20
    eps_sub: float = 0.1
    m2: Optional[int] = None
    inner_iters: int = 25
    lam: Optional[float] = None
    x_init: Optional[np.ndarray] = None
    seed: int = 0
    osnap_s: int = 1
    sub_max_iter: Optional[int] = None
    keep_iterates: bool = False

    def __post_init__(self):
        self.sketch = SketchKind(self.sketch)
        if self.m < 1:
            raise ParameterError("sketch size m must be >= 1")
        if self.m2 is not None and self.m2 < 1:
            raise ParameterError("sketch size m2 must be >= 1")
        if self.iters < 1 or self.inner_iters < 1:
            raise ParameterError("iteration counts must be >= 1")
        if not 0.0 < self.eps_sub < 1.0:
            raise ParameterError("eps_sub must lie in (0, 1)")


@dataclass
class IterationRecord:
    iteration: int
    error: float
    residual: float
    flops: int
    wall_time: float
    sub_iters: int


@dataclass
class InnerRecord:
    """One inner (primal-dual) step, tagged by its outer iteration."""
    outer: int
    inner: int
    grad_norm: float
    sub_iters: int


@dataclass
class SolveReport:
    solver: str
    x_final: np.ndarray
    records: list
    flops: FlopCounter
    momentum: Optional[MomentumParams] = None
    nu_final: Optional[np.ndarray] = None
    iterates: Optional[list] = None
    inner_iterates: Optional[list] = None
    sub_failures: int = 0
    inner_records: Optional[list] = None
    aborted: bool = False
    message: str = ""
    initial_error: float = float("nan")

    @property
    def errors(self) -> np.ndarray:
        return np.array([r.error for r in self.records])

    @property
    def residuals(self) -> np.ndarray:
        return np.array([r.residual for r in self.records])

    @property
    def converged_rate_estimate(self) -> float:
        """Median ratio of consecutive error norms over the final third.

        Falls back to residuals when no reference solution was supplied.
        """
        e = self.errors
        if e.size == 0 or not np.all(np.isfinite(e)):
            e = self.residuals
        k = len(e)
        if k < 2:
            return float("nan")
        tail = e[k - max(2, k // 3):]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = tail[1:] / tail[:-1]
        ratios = ratios[np.isfinite(ratios)]
        return float(np.median(ratios)) if ratios.size else float("nan")


class _Recorder:
    """Collects per-iteration records; time spent here is excluded from wall time."""

    def __init__(self, reference, keep_iterates):
        self.reference = None if reference is None else np.asarray(reference, dtype=float)
        self.ref_norm = None if reference is None else float(np.linalg.norm(reference)) or 1.0
        self.records = []
        self.iterates = [] if keep_iterates else None
        self.initial_error = float("nan")
        self._t0 = time.perf_counter()
        self._paused = 0.0

    def error(self, x):
        if self.reference is None:
            return float("nan")
        return float(np.linalg.norm(x - self.reference) / self.ref_norm)

    def start(self, x):
        t = time.perf_counter()
        self.initial_error = self.error(x)
        if self.iterates is not None:
            self.iterates.append(np.array(x, copy=True))
        self._paused += time.perf_counter() - t

    def add(self, it, x, flops, sub_iters):
        t = time.perf_counter()
        wall = t - self._t0 - self._paused
        self.records.append(IterationRecord(it, self.error(x), float("nan"), flops, wall,
                                            sub_iters))
        if self.iterates is not None:
            self.iterates.append(np.array(x, copy=True))
        self._paused += time.perf_counter() - t

    def set_residual(self, value):
        if self.records:
            self.records[-1].residual = value


# -- sub-problem solvers -----------------------------------------------------

class _SketchedSystem:
    """Solves ((SB)^T SB + lam I) dy = rhs, exactly or with the AAb solver."""

    def __init__(self, SB, lam, scheme, eps_sub, max_iter, flops):
        self.SB = SB
        self.lam = lam
        self.scheme = scheme
        self.eps_sub = eps_sub
        self.flops = flops
        k = SB.shape[1]
        self.max_iter = max_iter or default_max_iter(*SB.shape)
        if scheme == EXACT:
            stacked = np.vstack([SB, math.sqrt(lam) * np.eye(k)]) if lam > 0 else SB
            if stacked.shape[0] < k:
                raise ParameterError("exact scheme with lam = 0 needs m >= number of unknowns")
            self.R = qr_r_factor(stacked)
            diag = np.abs(np.diag(self.R))
            if diag.min() <= 1e-14 * max(diag.max(), 1e-300):
                raise ParameterError("sketched system is singular; use lam > 0")
            flops.charge(FACTOR, householder_r_flops(*stacked.shape))
        elif scheme != INEXACT:
            raise ParameterError(f"unknown scheme {scheme!r}")

    def solve(self, rhs):
        """Return (dy, sub_iters, failed)."""
        if self.scheme == EXACT:
            k = self.R.shape[0]
            y = solve_triangular(self.R, rhs, trans="T", lower=False, check_finite=False)
            dy = solve_triangular(self.R, y, lower=False, check_finite=False)
            self.flops.charge(SUBSOLVER, 2 * k * k)
            return dy, 0, False
        local = FlopCounter()
        res = aab_solve(self.SB, rhs, self.lam, self.eps_sub, self.max_iter, flops=local)
        self.flops.merge(local, into=SUBSOLVER)
        return res.x, res.iters, res.status == MAX_ITER


def exact_sub_solve(SA, g, lam: float) -> np.ndarray:
    """argmin_x ||SA x||^2 + lam ||x||^2 + 2<g, x>, i.e. -((SA)^T SA + lam I)^{-1} g."""
    SA = np.atleast_2d(np.asarray(SA, dtype=float))
    if SA.shape[0] < 1:
        raise ParameterError("SA needs at least one row")
    system = _SketchedSystem(SA, lam, EXACT, 0.1, None, FlopCounter())
    return -system.solve(np.asarray(g, dtype=float))[0]


# -- helpers -----------------------------------------------------------------

def _problem_parts(problem, cfg):
    A = np.asarray(problem.A, dtype=float)
    b = np.asarray(problem.b, dtype=float)
    lam = cfg.lam if cfg.lam is not None else getattr(problem, "lam", 0.0)
    if lam is None or lam < 0:
        raise ParameterError("regularization parameter must be >= 0")
    if b.shape != (A.shape[0],):
        raise ParameterError(f"b has shape {b.shape}, expected ({A.shape[0]},)")
    return A, b, float(lam)


def _resolve_momentum(spec, m) -> MomentumParams:
    if isinstance(spec, MomentumParams):
        return spec
    if isinstance(spec, Theoretical):
        return momentum_theoretical(spec.eps)
    if isinstance(spec, Empirical):
        return momentum_empirical(spec.sd, m)
    raise ParameterError("momentum must be MomentumParams, Theoretical(eps) or Empirical(sd)")


def _initial(cfg, k):
    if cfg.x_init is None:
        return np.zeros(k)
    x0 = np.array(cfg.x_init, dtype=float)
    if x0.shape != (k,):
        raise ParameterError(f"x_init has shape {x0.shape}, expected ({k},)")
    return x0


def _check_sketch_size(m, rows, what):
    if m > rows:
        raise ParameterError(f"{what}: sketch size {m} exceeds the {rows} rows being sketched")


# -- M-IHS and Dual M-IHS ----------------------------------------------------

def _primal_grad(A, b, lam, flops):
    n, d = A.shape

    def neg_grad(x, charge=True):
        g = A.T @ (b - A @ x) - lam * x
        if charge:
            flops.charge(MATVEC, 4 * n * d)
            flops.charge(VECTOR, 3 * d)
        return g
    return neg_grad


def _dual_grad(A, b, lam, flops):
    n, d = A.shape

    def neg_grad(nu, charge=True):
        g = b - A @ (A.T @ nu) - lam * nu
        if charge:
            flops.charge(MATVEC, 4 * n * d)
            flops.charge(VECTOR, 3 * n)
        return g
    return neg_grad


def m_ihs(problem, cfg: SolverConfig, scheme: str = INEXACT, reference=None) -> SolveReport:
    """Primal M-IHS for n >= d; sketches the rows of A."""
    A, b, lam = _problem_parts(problem, cfg)
    n, d = A.shape
    if n < d:
        warnings.warn("m_ihs is meant for n >= d; consider dual_m_ihs", stacklevel=2)
    _check_sketch_size(cfg.m, n, "m_ihs")
    x0 = _initial(cfg, d)
    flops = FlopCounter()
    rec = _Recorder(reference, cfg.keep_iterates)
    S = build_sketch(cfg.sketch, n, cfg.m, cfg.seed, s=cfg.osnap_s)
    SA = apply_sketch(S, A, flops)
    params = _resolve_momentum(cfg.momentum, cfg.m)
    system = _SketchedSystem(SA, lam, scheme, cfg.eps_sub, cfg.sub_max_iter, flops)
    neg_grad = _primal_grad(A, b, lam, flops)
    scale = float(np.linalg.norm(A.T @ b)) or 1.0
    x, failures = _heavy_ball(x0, neg_grad, system, params, cfg.iters, flops, rec, scale,
                              lambda y: y, 0)
    return SolveReport("m_ihs", x, rec.records, flops, params, iterates=rec.iterates,
                       sub_failures=failures, initial_error=rec.initial_error)


def dual_m_ihs(problem, cfg: SolverConfig, scheme: str = INEXACT, reference=None) -> SolveReport:
    """Dual M-IHS for n <= d; iterates on nu in R^n and recovers x = A^T nu.

    Record flops include the 2nd flops of recovering x from the current nu.
    """
    A, b, lam = _problem_parts(problem, cfg)
    if lam <= 0:
        raise ParameterError("dual_m_ihs needs lam > 0")
    n, d = A.shape
    if n > d:
        warnings.warn("dual_m_ihs is meant for n <= d; consider m_ihs", stacklevel=2)
    _check_sketch_size(cfg.m, d, "dual_m_ihs")
    flops = FlopCounter()
    rec = _Recorder(reference, cfg.keep_iterates)
    S = build_sketch(cfg.sketch, d, cfg.m, cfg.seed, s=cfg.osnap_s)
    SAt = apply_sketch(S, A.T, flops)
    params = _resolve_momentum(cfg.momentum, cfg.m)
    system = _SketchedSystem(SAt, lam, scheme, cfg.eps_sub, cfg.sub_max_iter, flops)
    neg_grad = _dual_grad(A, b, lam, flops)
    scale = float(np.linalg.norm(b)) or 1.0
    nu, failures = _heavy_ball(np.zeros(n), neg_grad, system, params, cfg.iters, flops, rec,
                               scale, lambda v: A.T @ v, 2 * n * d)
    x = A.T @ nu
    flops.charge(MATVEC, 2 * n * d)
    return SolveReport("dual_m_ihs", x, rec.records, flops, params, nu_final=nu,
                       iterates=rec.iterates, sub_failures=failures,
                       initial_error=rec.initial_error)


def _heavy_ball(y0, neg_grad, system, params, iters, flops, rec, res_scale, to_x,
                recovery_flops):
    """Outer loop shared by the primal and dual solvers.

    Record i holds iterate y^{i+1}. Its gradient is only formed at the start of
    step i + 1, so residuals are filled one step late; the last one is
    evaluated without charging flops.
    """
    alpha, beta = params.alpha, params.beta
    k = y0.shape[0]
    y, y_prev = y0.copy(), y0.copy()
    failures = 0
    rec.start(to_x(y))
    for i in range(1, iters + 1):
        g = neg_grad(y)
        rec.set_residual(float(np.linalg.norm(g)) / res_scale)
        dy, sub_iters, failed = system.solve(g)
        failures += failed
        y_next = y + alpha * dy + beta * (y - y_prev)
        flops.charge(VECTOR, 5 * k)
        y_prev, y = y, y_next
        rec.add(i, to_x(y), flops.total + recovery_flops, sub_iters)
    rec.set_residual(float(np.linalg.norm(neg_grad(y, charge=False))) / res_scale)
    return y, failures


# -- Primal Dual M-IHS -------------------------------------------------------

def pd_m_ihs_over(problem, cfg: SolverConfig, scheme: str = INEXACT,
                  reference=None) -> SolveReport:
    """Primal Dual M-IHS for n >= d: sketches A to m1 rows, then (SA)^T to m2 rows."""
    A, b, lam = _problem_parts(problem, cfg)
    if lam <= 0:
        raise ParameterError("pd_m_ihs_over needs lam > 0")
    n, d = A.shape
    _check_sketch_size(cfg.m, n, "pd_m_ihs_over (m1)")
    flops = FlopCounter()
    S = build_sketch(cfg.sketch, n, cfg.m, cfg.seed, s=cfg.osnap_s)
    SB = apply_sketch(S, A, flops)
    scale = float(np.linalg.norm(A.T @ b)) or 1.0
    return _pd_run("pd_m_ihs_over", cfg, scheme, reference, lam, SB,
                   _primal_grad(A, b, lam, flops), _initial(cfg, d), scale,
                   lambda y: y, 0, flops)


def pd_m_ihs_under(problem, cfg: SolverConfig, scheme: str = INEXACT,
                   reference=None) -> SolveReport:
    """Primal Dual M-IHS for n <= d: sketches A^T to m1 rows, then A S^T to m2 rows."""
    A, b, lam = _problem_parts(problem, cfg)
    if lam <= 0:
        raise ParameterError("pd_m_ihs_under needs lam > 0")
    n, d = A.shape
    _check_sketch_size(cfg.m, d, "pd_m_ihs_under (m1)")
    flops = FlopCounter()
    S = build_sketch(cfg.sketch, d, cfg.m, cfg.seed, s=cfg.osnap_s)
    SB = apply_sketch(S, A.T, flops)
    scale = float(np.linalg.norm(b)) or 1.0
    report = _pd_run("pd_m_ihs_under", cfg, scheme, reference, lam, SB,
                     _dual_grad(A, b, lam, flops), np.zeros(n), scale,
                     lambda v: A.T @ v, 2 * n * d, flops)
    nu = report.x_final
    report.nu_final = nu
    report.x_final = A.T @ nu
    flops.charge(MATVEC, 2 * n * d)
    return report


def _pd_run(name, cfg, scheme, reference, lam, SB, neg_grad, y0, res_scale, to_x,
            recovery_flops, flops) -> SolveReport:
    """Outer heavy ball on y, inner heavy ball on the dual variable z in R^{m1}.

    The inner problem is min_z 1/2 ||SB^T z - r||^2 + lam/2 ||z||^2 with r the
    outer negative gradient; its Hessian SB SB^T + lam I is sketched once more
    by W (m2 rows, independent seed). The outer step is recovered as
    (r - SB^T z) / lam. z is warm-started from the previous outer iteration
    while its momentum restarts at zero.
    """
    m1, k = SB.shape
    m2 = cfg.m2 if cfg.m2 is not None else cfg.m
    _check_sketch_size(m2, k, f"{name} (m2)")
    W = build_sketch(cfg.sketch, k, m2, child_seed(cfg.seed, 1), s=min(cfg.osnap_s, m2))
    WSBt = apply_sketch(W, SB.T, flops)
    params1 = _resolve_momentum(cfg.momentum, m1)
    params2 = _resolve_momentum(cfg.momentum, m2)
    system = _SketchedSystem(WSBt, lam, scheme, cfg.eps_sub, cfg.sub_max_iter, flops)
    rec = _Recorder(reference, cfg.keep_iterates)
    inner_records = []
    z_hist = [] if cfg.keep_iterates else None

    a1, b1 = params1.alpha, params1.beta
    a2, b2 = params2.alpha, params2.beta
    y, y_prev = y0.copy(), y0.copy()
    z = np.zeros(m1)
    failures = 0
    aborted, message = False, ""
    rec.start(to_x(y))
    for i in range(1, cfg.iters + 1):
        r = neg_grad(y)
        rec.set_residual(float(np.linalg.norm(r)) / res_scale)
        z_prev = z.copy()
        sub_total = 0
        first_g = gn = None
        for j in range(1, cfg.inner_iters + 1):
            g = SB @ (r - SB.T @ z) - lam * z
            flops.charge(MATVEC, 4 * k * m1)
            flops.charge(VECTOR, 3 * m1)
            gn = float(np.linalg.norm(g))
            if first_g is None:
                first_g = gn
            dz, sub_iters, failed = system.solve(g)
            sub_total += sub_iters
            failures += failed
            z_next = z + a2 * dz + b2 * (z - z_prev)
            flops.charge(VECTOR, 5 * m1)
            z_prev, z = z, z_next
            inner_records.append(InnerRecord(i, j, gn, sub_iters))
        if first_g > 0 and gn > 10.0 * first_g:
            aborted = True
            message = (f"inner loop diverged at outer iteration {i}: "
                       f"gradient norm {first_g:.3e} -> {gn:.3e}")
            break
        dy = (r - SB.T @ z) / lam
        flops.charge(MATVEC, 2 * k * m1)
        flops.charge(VECTOR, 2 * k)
        y_next = y + a1 * dy + b1 * (y - y_prev)
        flops.charge(VECTOR, 5 * k)
        y_prev, y = y, y_next
        if z_hist is not None:
            z_hist.append(z.copy())
        rec.add(i, to_x(y), flops.total + recovery_flops, sub_total)
    rec.set_residual(float(np.linalg.norm(neg_grad(y, charge=False))) / res_scale)
    return SolveReport(name, y, rec.records, flops, params1, iterates=rec.iterates,
                       inner_iterates=z_hist, inner_records=inner_records,
                       sub_failures=failures, aborted=aborted, message=message,
                       initial_error=rec.initial_error)


# -- unpreconditioned baseline -----------------------------------------------

def baseline_lsqr(problem, max_iter: int = 100, tol: float = 1e-10, lam=None,
                  reference=None, flop_budget: int | None = None,
                  keep_iterates: bool = False) -> SolveReport:
    """Damped LSQR on [A; sqrt(lam) I] x ~ [b; 0], one record per iteration.

    Stops after ``max_iter`` iterations, when the normal-equation residual
    estimate drops below ``tol * ||A^T b||``, or when the next iteration would
    exceed ``flop_budget``. Charges 4nd + 5n + 9d flops per iteration.
    """
    A = np.asarray(problem.A, dtype=float)
    b = np.asarray(problem.b, dtype=float)
    lam = float(getattr(problem, "lam", 0.0) if lam is None else lam)
    n, d = A.shape
    damp = math.sqrt(lam)
    flops = FlopCounter()
    rec = _Recorder(reference, keep_iterates)
    x = np.zeros(d)

    beta = float(np.linalg.norm(b))
    flops.charge(VECTOR, 3 * n)
    u = b / beta if beta > 0 else b.copy()
    v = A.T @ u
    flops.charge(MATVEC, 2 * n * d)
    alfa = float(np.linalg.norm(v))
    flops.charge(VECTOR, 3 * d)
    if alfa > 0:
        v = v / alfa
    w = v.copy()
    phibar, rhobar = beta, alfa
    arnorm0 = alfa * beta
    rec.start(x)
    per_iter = 4 * n * d + 5 * n + 9 * d
    if arnorm0 == 0:
        return SolveReport("baseline_lsqr", x, rec.records, flops, iterates=rec.iterates,
                           initial_error=rec.initial_error)
    for it in range(1, max_iter + 1):
        if flop_budget is not None and flops.total + per_iter > flop_budget:
            break
        u = A @ v - alfa * u
        beta = float(np.linalg.norm(u))
        if beta > 0:
            u = u / beta
        v = A.T @ u - beta * v
        alfa = float(np.linalg.norm(v))
        if alfa > 0:
            v = v / alfa
        flops.charge(MATVEC, 4 * n * d)
        flops.charge(VECTOR, 5 * n + 5 * d)
        rhobar1 = math.hypot(rhobar, damp)
        cs1 = rhobar / rhobar1
        phibar = cs1 * phibar
        rho = math.hypot(rhobar1, beta)
        cs, sn = rhobar1 / rho, beta / rho
        theta = sn * alfa
        rhobar = -cs * alfa
        phi = cs * phibar
        phibar = sn * phibar
        x = x + (phi / rho) * w
        w = v - (theta / rho) * w
        flops.charge(VECTOR, 4 * d)
        arnorm = alfa * abs(sn * phi)
        rec.add(it, x, flops.total, 0)
        rec.set_residual(arnorm / arnorm0)
        if arnorm <= tol * arnorm0:
            break
    return SolveReport("baseline_lsqr", x, rec.records, flops, iterates=rec.iterates,
                       initial_error=rec.initial_error)


SOLVERS = {
    "m_ihs": m_ihs,
    "dual_m_ihs": dual_m_ihs,
    "pd_m_ihs_over": pd_m_ihs_over,
    "pd_m_ihs_under": pd_m_ihs_under,
}
