import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mihs.errors import ParameterError
from mihs.estimate import sd_exact
from mihs.flops import FACTOR
from mihs.problems import Problem, generate_problem
from mihs.solvers import (SOLVERS, Empirical, MomentumParams, SolverConfig, Theoretical,
                          baseline_lsqr, dual_m_ihs, exact_sub_solve, iteration_bound, m_ihs,
                          momentum_empirical, momentum_theoretical, pd_m_ihs_over,
                          pd_m_ihs_under, theoretical_rate)

from conftest import dense_ridge

NEWTON = MomentumParams(1.0, 0.0)


def sd_of(p):
    return sd_exact(np.linalg.svd(p.A, compute_uv=False), p.lam)


# -- momentum and bounds -------------------------------------------------------

def test_theoretical_example():
    mp = momentum_theoretical(0.6)
    assert mp.beta == pytest.approx(1 / 9, rel=1e-14)
    assert mp.alpha == pytest.approx(0.8 * 8 / 9, rel=1e-14)
    assert mp.rate == pytest.approx(theoretical_rate(0.6), rel=1e-14)


@given(st.floats(1e-6, 1 - 1e-6))
def test_two_beta_forms_agree(eps):
    mp = momentum_theoretical(eps)
    assert mp.beta == pytest.approx((eps / (1 + math.sqrt(1 - eps * eps))) ** 2,
                                    rel=1e-10, abs=1e-14)
    assert 0 < mp.alpha <= 1 and 0 <= mp.beta < 1


def test_empirical_example():
    mp = momentum_empirical(443, 4000)
    assert mp.beta == pytest.approx(0.11075, rel=1e-14)
    assert mp.alpha == pytest.approx(0.7907655625, rel=1e-14)


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.2])
def test_momentum_errors(bad):
    with pytest.raises(ParameterError):
        momentum_theoretical(bad)
    with pytest.raises(ParameterError):
        momentum_empirical(5, 5)
    with pytest.raises(ParameterError):
        MomentumParams(0.0, 0.5)
    with pytest.raises(ParameterError):
        MomentumParams(0.5, 1.0)


def test_iteration_bound_examples():
    assert iteration_bound(1e-4, 0.333) == 6
    rate = theoretical_rate(0.3)
    assert iteration_bound(rate, 0.3) == 1
    assert iteration_bound(rate ** 5, 0.3) == 5
    assert iteration_bound(1e-4, 0.333, C=10.0) > 6
    assert iteration_bound(1e-4, 0.333, C=10.0, mode="literal") > 6


@given(st.floats(1e-12, 0.99), st.floats(0.01, 0.49))
def test_iteration_bound_is_sufficient_and_tight(eta, eps):
    N = iteration_bound(eta, eps)
    rate = theoretical_rate(eps)
    assert rate ** N <= eta * (1 + 1e-9)
    if N > 1:
        assert rate ** (N - 1) > eta * (1 - 1e-9)


@pytest.mark.parametrize("kw", [dict(eta=0.0), dict(eta=1.0), dict(eps=0.5),
                                dict(C=0.5), dict(C=2.0, mode="other")])
def test_iteration_bound_errors(kw):
    args = dict(eta=1e-3, eps=0.3)
    args.update(kw)
    with pytest.raises(ParameterError):
        iteration_bound(**args)


# -- sub-solve -----------------------------------------------------------------

def test_exact_sub_solve_examples(rng):
    assert np.allclose(exact_sub_solve(np.eye(3), [1.0, 2.0, 3.0], 1.0), [-0.5, -1.0, -1.5])
    SA = rng.standard_normal((12, 5))
    g = rng.standard_normal(5)
    expect = -np.linalg.solve(SA.T @ SA + 0.3 * np.eye(5), g)
    assert np.allclose(exact_sub_solve(SA, g, 0.3), expect)
    # fewer sketch rows than columns is fine once lam > 0
    SA = rng.standard_normal((2, 5))
    assert np.allclose(exact_sub_solve(SA, g, 0.1),
                       -np.linalg.solve(SA.T @ SA + 0.1 * np.eye(5), g))
    with pytest.raises(ParameterError):
        exact_sub_solve(SA, g, 0.0)


# -- solvers: closed-form cases ----------------------------------------------------

@pytest.mark.parametrize("scheme", ["exact", "inexact"])
def test_identity_sketch_is_newton(scheme, rng):
    p = Problem(rng.standard_normal((20, 6)), rng.standard_normal(20), lam=0.2)
    cfg = SolverConfig(m=20, sketch="identity", momentum=NEWTON, iters=1, eps_sub=1e-12)
    rep = m_ihs(p, cfg, scheme, reference=p.solution())
    assert np.allclose(rep.x_final, dense_ridge(p.A, p.b, 0.2), atol=1e-9)
    assert len(rep.records) == 1 and rep.records[0].error < 1e-9


def test_dual_identity_halves_b(rng):
    b = rng.standard_normal(7)
    p = Problem(np.eye(7), b, lam=1.0)
    cfg = SolverConfig(m=7, sketch="identity", momentum=NEWTON, iters=1)
    rep = dual_m_ihs(p, cfg, "exact")
    assert np.allclose(rep.x_final, b / 2, atol=1e-14)
    assert np.allclose(rep.nu_final, b / 2, atol=1e-14)


def test_pd_identity_sketches(rng):
    p = Problem(rng.standard_normal((15, 6)), rng.standard_normal(15), lam=0.5)
    cfg = SolverConfig(m=15, m2=6, sketch="identity", momentum=NEWTON, iters=2,
                       inner_iters=1)
    rep = pd_m_ihs_over(p, cfg, "exact")
    assert np.allclose(rep.x_final, p.solution(), atol=1e-10)
    q = Problem(rng.standard_normal((6, 15)), rng.standard_normal(6), lam=0.5)
    cfg = SolverConfig(m=15, m2=6, sketch="identity", momentum=NEWTON, iters=2,
                       inner_iters=1)
    rep = pd_m_ihs_under(q, cfg, "exact")
    assert np.allclose(rep.x_final, q.solution(), atol=1e-10)
    assert np.allclose(q.A.T @ rep.nu_final, rep.x_final)


def test_lsqr_identity_and_damped(rng):
    b = rng.standard_normal(5)
    rep = baseline_lsqr(Problem(np.eye(5), b), max_iter=3)
    assert np.allclose(rep.x_final, b)
    assert len(rep.records) == 1
    p = Problem(rng.standard_normal((30, 8)), rng.standard_normal(30), lam=0.7)
    rep = baseline_lsqr(p, max_iter=50, tol=1e-14, reference=p.solution())
    assert rep.records[-1].error < 1e-10
    r = p.A.T @ (p.b - p.A @ rep.x_final) - 0.7 * rep.x_final
    assert np.linalg.norm(r) < 1e-8 * np.linalg.norm(p.A.T @ p.b)
    assert rep.records[0].flops == 2 * 30 * 8 + 3 * 30 + 3 * 8 + 4 * 30 * 8 + 5 * 30 + 9 * 8


def test_lsqr_flop_budget(rng):
    p = Problem(rng.standard_normal((30, 8)), rng.standard_normal(30), lam=0.1)
    rep = baseline_lsqr(p, max_iter=100, tol=0.0, flop_budget=5000)
    assert rep.flops.total <= 5000 and len(rep.records) >= 1


# -- solvers: convergence --------------------------------------------------------

@pytest.fixture(scope="module")
def tall():
    p = generate_problem(600, 40, "philips", 1e5, 0.01, seed=21).with_lambda(1e-3)
    return p, sd_of(p), p.solution()


@pytest.fixture(scope="module")
def wide():
    p = generate_problem(40, 600, "philips", 1e5, 0.01, seed=22).with_lambda(1e-3)
    return p, sd_of(p), p.solution()


@pytest.mark.parametrize("scheme", ["exact", "inexact"])
@pytest.mark.parametrize("sketch", ["gaussian", "countsketch", "srht", "osnap"])
def test_m_ihs_converges(tall, scheme, sketch):
    p, sd, ref = tall
    m = math.ceil(6 * sd)
    cfg = SolverConfig(m=m, sketch=sketch, momentum=Empirical(sd), iters=40, seed=3,
                       osnap_s=2, eps_sub=0.01)
    rep = m_ihs(p, cfg, scheme, reference=ref)
    assert rep.records[-1].error < 1e-8
    assert rep.converged_rate_estimate < 0.8
    assert rep.sub_failures == 0


@pytest.mark.parametrize("scheme", ["exact", "inexact"])
def test_dual_converges(wide, scheme):
    p, sd, ref = wide
    cfg = SolverConfig(m=math.ceil(6 * sd), momentum=Empirical(sd), iters=40, seed=1,
                       eps_sub=0.01)
    rep = dual_m_ihs(p, cfg, scheme, reference=ref)
    assert rep.records[-1].error < 1e-8


@pytest.mark.parametrize("scheme", ["exact", "inexact"])
def test_pd_converges(tall, wide, scheme):
    p, sd, ref = tall
    m = math.ceil(4 * sd)
    cfg = SolverConfig(m=m, m2=min(m, 40), momentum=Empirical(sd), iters=40, inner_iters=20,
                       seed=2, eps_sub=0.01)
    rep = pd_m_ihs_over(p, cfg, scheme, reference=ref)
    assert not rep.aborted and rep.records[-1].error < 1e-7
    assert len(rep.inner_records) == 40 * 20
    q, sdq, refq = wide
    m = math.ceil(4 * sdq)
    cfg = SolverConfig(m=m, m2=min(m, 40), momentum=Empirical(sdq), iters=40, inner_iters=20,
                       seed=2, eps_sub=0.01)
    rep = pd_m_ihs_under(q, cfg, scheme, reference=refq)
    assert not rep.aborted and rep.records[-1].error < 1e-7


def test_theoretical_rule_runs(tall):
    p, sd, ref = tall
    cfg = SolverConfig(m=math.ceil(8 * sd), momentum=Theoretical(0.5), iters=30, seed=4)
    assert m_ihs(p, cfg, "exact", reference=ref).records[-1].error < 1e-6


def test_overestimated_sd_is_safe(tall):
    # beta = sd_hat / m with sd_hat above the truth only slows convergence
    p, sd, ref = tall
    m = math.ceil(4 * sd)
    cfg = SolverConfig(m=m, momentum=Empirical(min(1.6 * sd, m - 1)), iters=60, seed=5)
    assert m_ihs(p, cfg, "exact", reference=ref).records[-1].error < 1e-6


def test_zero_lambda_exact_scheme():
    p = generate_problem(400, 30, "geometric", 1e4, 0.0, seed=8)
    cfg = SolverConfig(m=120, momentum=Empirical(30), iters=60, seed=0)
    rep = m_ihs(p, cfg, "exact", reference=p.x_true)
    assert rep.records[-1].error < 1e-8


# -- records, flops, determinism ---------------------------------------------------

def test_record_layout(tall):
    p, sd, ref = tall
    m = math.ceil(2 * sd)
    cfg = SolverConfig(m=m, momentum=Empirical(sd), iters=5, keep_iterates=True)
    rep = m_ihs(p, cfg, "exact", reference=ref)
    assert [r.iteration for r in rep.records] == [1, 2, 3, 4, 5]
    assert len(rep.iterates) == 6
    for r, x in zip(rep.records, rep.iterates[1:]):
        assert r.error == pytest.approx(np.linalg.norm(x - ref) / np.linalg.norm(ref))
        res = p.A.T @ (p.b - p.A @ x) - p.lam * x
        assert r.residual == pytest.approx(np.linalg.norm(res) / np.linalg.norm(p.A.T @ p.b))
    fl = [r.flops for r in rep.records]
    assert all(b > a for a, b in zip(fl, fl[1:]))
    assert rep.flops.tallies[FACTOR] > 0
    assert rep.initial_error == pytest.approx(1.0)


def test_bit_identical_reruns(tall):
    p, sd, ref = tall
    for name, fn in SOLVERS.items():
        q = p if name in ("m_ihs", "pd_m_ihs_over") else Problem(p.A[:30], p.b[:30], lam=p.lam)
        m = 20
        cfg = SolverConfig(m=m, m2=20 if name == "pd_m_ihs_over" else 15,
                           momentum=MomentumParams(0.5, 0.2), iters=4, inner_iters=3, seed=9)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            a = fn(q, cfg, "inexact")
            b = fn(q, cfg, "inexact")
        assert np.array_equal(a.x_final, b.x_final), name
        assert [r.flops for r in a.records] == [r.flops for r in b.records]


def test_validation_errors(rng):
    p = Problem(rng.standard_normal((10, 4)), rng.standard_normal(10), lam=0.0)
    with pytest.raises(ParameterError):
        m_ihs(p, SolverConfig(m=11, momentum=NEWTON))
    with pytest.raises(ParameterError):
        dual_m_ihs(p, SolverConfig(m=2, momentum=NEWTON))
    with pytest.raises(ParameterError):
        pd_m_ihs_over(p, SolverConfig(m=5, momentum=NEWTON))
    with pytest.raises(ParameterError):
        pd_m_ihs_over(p.with_lambda(0.1), SolverConfig(m=5, m2=5, momentum=NEWTON))
    with pytest.raises(ParameterError):
        m_ihs(p, SolverConfig(m=5, momentum=NEWTON, x_init=np.ones(3)))
    with pytest.raises(ParameterError):
        m_ihs(p, SolverConfig(m=5, momentum=None))
    with pytest.raises(ParameterError):
        SolverConfig(m=0)
    with pytest.raises(ParameterError):
        SolverConfig(m=3, eps_sub=1.0)
    with pytest.warns(UserWarning):
        m_ihs(Problem(rng.standard_normal((4, 6)), rng.standard_normal(4), lam=0.1),
              SolverConfig(m=4, momentum=NEWTON, iters=1))


def test_pd_divergence_aborts(tall):
    # an absurdly aggressive inner step makes the inner loop blow up
    p, sd, ref = tall
    cfg = SolverConfig(m=20, m2=20, momentum=MomentumParams(1.0, 0.95), iters=5,
                       inner_iters=25, seed=0)
    rep = pd_m_ihs_over(p, cfg, "exact")
    assert rep.aborted and "diverged" in rep.message
    assert np.all(np.isfinite(rep.x_final))


@given(st.integers(0, 10_000))
@settings(max_examples=15)
def test_inexact_tracks_exact_direction(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((40, 6))
    p = Problem(A, rng.standard_normal(40), lam=0.05)
    cfg = SolverConfig(m=30, momentum=MomentumParams(1.0, 0.0), iters=1, seed=seed,
                       eps_sub=1e-10)
    a = m_ihs(p, cfg, "exact").x_final
    b = m_ihs(p, cfg, "inexact").x_final
    assert np.allclose(a, b, rtol=1e-7, atol=1e-9)


def _flops_to(rep, eta):
    return next((r.flops for r in rep.records if r.error <= eta), None)


@pytest.mark.parametrize("d", [64, 128])
def test_inexact_cheaper_than_exact_above_threshold(d):
    # m = d and lam chosen so that sd = d / 10; the one-off QR of the exact
    # scheme costs O(d^3) and loses to a few AAb passes once d >= 64
    from scipy.optimize import brentq
    p = generate_problem(8 * d, d, "geometric", 1e6, 0.01, seed=d)
    s = np.linalg.svd(p.A, compute_uv=False)
    lam = math.exp(brentq(lambda t: sd_exact(s, math.exp(t)) - d / 10, -60, 10))
    p = p.with_lambda(lam)
    ref = p.solution()
    for seed in range(3):
        cfg = SolverConfig(m=d, momentum=Empirical(d / 10), iters=40, seed=seed)
        exact = _flops_to(m_ihs(p, cfg, "exact", reference=ref), 1e-4)
        inexact = _flops_to(m_ihs(p, cfg, "inexact", reference=ref), 1e-4)
        assert exact is not None and inexact is not None
        assert inexact < exact
