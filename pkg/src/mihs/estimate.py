"""Statistical dimension sd_lam(A) = sum sigma_i^2 / (sigma_i^2 + lam).

``hutchinson_sd`` estimates it from a sketched matrix SA without any
factorization. It uses d - sd = lam * tr((A^T S^T S A + lam I)^{-1}) and probes
the trace with random sign vectors, solving each system approximately with the
AAb solver.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from mihs.errors import ParameterError
from mihs.flops import ESTIMATE, FlopCounter
from mihs.linalg import child_seed, make_rng
from mihs.subsolver import aab_solve, default_max_iter


def sd_exact(sigma, lam: float) -> float:
    """Statistical dimension from singular values; counts nonzero sigma at lam = 0."""
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma < 0):
        raise ParameterError("singular values must be nonnegative")
    if lam < 0:
        raise ParameterError("lam must be nonnegative")
    s2 = sigma * sigma
    if lam == 0:
        return float(np.count_nonzero(s2))
    return float(np.sum(s2 / (s2 + lam)))


@dataclass
class SdEstimate:
    value: float          # clamped to [0, d]
    raw: float
    samples: int
    traces: list = field(default_factory=list)
    eps_tr: float = 0.5
    d: int = 0

    @property
    def usable(self) -> float:
        """Value clamped to [1, d]: the form fed to the empirical momentum rule."""
        return float(min(max(self.raw, 1.0), max(self.d, 1)))


def hutchinson_sd(SA, lam: float, T: int = 2, eps_tr: float = 0.5, seed: int = 0,
                  probes: str = "rademacher", flops: FlopCounter | None = None,
                  max_iter: int | None = None) -> SdEstimate:
    """Estimate sd_lam from the sketched matrix ``SA`` (m x d).

    Each probe v (entries +-1, or standard normal with ``probes="gaussian"``)
    contributes lam * <v, z> with z ~ (SA^T SA + lam I)^{-1} v from
    ``aab_solve`` at tolerance ``eps_tr``; the estimate is d - mean. Probe l
    draws from the child seed (seed, l), so results do not depend on the
    evaluation order.
    """
    SA = np.asarray(SA, dtype=float)
    if SA.ndim != 2:
        raise ParameterError("SA must be a matrix")
    if lam <= 0:
        raise ParameterError("hutchinson_sd needs lam > 0")
    if T < 1:
        raise ParameterError("need at least one probe")
    if not 0 < eps_tr < 1:
        raise ParameterError("eps_tr must lie in (0, 1)")
    m, d = SA.shape
    cap = max_iter or max(default_max_iter(m, d), 1)
    traces = []
    local = FlopCounter()
    for ell in range(T):
        rng = make_rng(child_seed(seed, ell))
        if probes == "rademacher":
            v = rng.choice(np.array([-1.0, 1.0]), size=d)
        elif probes == "gaussian":
            v = rng.standard_normal(d)
        else:
            raise ParameterError(f"unknown probe distribution {probes!r}")
        z = aab_solve(SA, v, lam, eps_tr, cap, flops=local).x
        traces.append(float(lam * (v @ z)))
    if flops is not None:
        flops.merge(local, into=ESTIMATE)
        flops.charge(ESTIMATE, 3 * d * T)
    raw = d - sum(traces) / T
    return SdEstimate(float(min(max(raw, 0.0), d)), float(raw), T, traces, eps_tr, d)
