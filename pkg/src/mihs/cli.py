"""``mihs`` command line: gen, solve, bench, estimate-sd, sketch.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from importlib import resources
from pathlib import Path

from mihs.bench import (CSV_COLUMNS, ExperimentConfig, _fmt, build_problem, resolve_momentum,
                        resolve_size, run_experiment)
from mihs.errors import ConfigError, MatrixMarketError, ParameterError
from mihs.estimate import hutchinson_sd, sd_exact
from mihs.linalg import compact_svd
from mihs.mmio import write_matrix
from mihs.problems import load_problem, save_problem
from mihs.sketch import SketchKind, apply_sketch, build_sketch
from mihs.solvers import SOLVERS, SolverConfig, baseline_lsqr

SOLVER_CHOICES = tuple(SOLVERS) + ("baseline_lsqr",)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _u64(text):
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mihs", description="Momentum Iterative Hessian Sketch solvers")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, problem=True):
        sp.add_argument("--config", help="experiment config JSON")
        sp.add_argument("--seed", type=_u64, default=None)
        if problem:
            sp.add_argument("--problem", help="problem sidecar JSON written by `mihs gen`")
            sp.add_argument("--lambda", dest="lam", type=float, default=None)

    g = sub.add_parser("gen", help="generate a synthetic problem")
    common(g, problem=False)
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--n", type=int, default=1024)
    g.add_argument("--d", type=int, default=64)
    g.add_argument("--kappa", type=float, default=1e6)
    g.add_argument("--noise", type=float, default=0.01)
    g.add_argument("--profile", choices=("geometric", "philips", "heat"), default="philips")
    g.add_argument("--uniform-x", action="store_true")
    g.add_argument("--lambda", dest="lam", default="optimal",
                   help="regularization: a number or 'optimal'")
    g.add_argument("--name", default="problem")

    s = sub.add_parser("solve", help="run one solver and print a summary")
    common(s)
    s.add_argument("--solver", choices=SOLVER_CHOICES, default="m_ihs")
    s.add_argument("--scheme", choices=("exact", "inexact"), default="inexact")
    s.add_argument("--sketch", choices=[k.value for k in SketchKind], default="gaussian")
    s.add_argument("--m", default="4sd", help="sketch size: integer or '<k>sd'")
    s.add_argument("--m2", default=None)
    s.add_argument("--iters", type=int, default=30)
    s.add_argument("--inner-iters", type=int, default=25)
    s.add_argument("--eps-sub", type=float, default=0.1)
    s.add_argument("--format", choices=("json", "csv"), default="json")
    s.add_argument("--out", help="write the solution vector (.mtx) here")

    b = sub.add_parser("bench", help="run an experiment config")
    common(b, problem=False)
    b.add_argument("--out", help="output directory (overrides the config)")
    b.add_argument("--trials", type=int, default=None)
    b.add_argument("--format", choices=("json", "csv"), default="json",
                   help="what to print on stdout: the summary JSON or the CSV paths")

    e = sub.add_parser("estimate-sd", help="Hutchinson estimate of the statistical dimension")
    common(e)
    e.add_argument("--sketch", choices=[k.value for k in SketchKind], default="gaussian")
    e.add_argument("--m", default="4sd")
    e.add_argument("--samples", type=int, default=2)
    e.add_argument("--eps-tr", type=float, default=0.5)
    e.add_argument("--exact", action="store_true", help="also report the SVD value")

    k = sub.add_parser("sketch", help="materialize SA as a Matrix Market file")
    common(k)
    k.add_argument("--sketch", choices=[k.value for k in SketchKind], default="gaussian")
    k.add_argument("--m", required=True)
    k.add_argument("--out", required=True, help="output .mtx path")
    return p


def _default_problem_path() -> Path:
    return Path(str(resources.files("mihs") / "data" / "tiny.json"))


def _load_problem(args):
    seed = args.seed if args.seed is not None else 0
    if args.problem and args.config:
        raise UsageError("give either --problem or --config, not both")
    if args.config:
        cfg = ExperimentConfig.load(args.config)
        problem = build_problem(cfg.problem, seed if args.seed is not None else cfg.seed,
                                cfg.base_dir)
    else:
        problem = load_problem(args.problem or _default_problem_path())
    if getattr(args, "lam", None) is not None:
        problem = problem.with_lambda(args.lam)
    return problem


def _sd_of(problem):
    return sd_exact(compact_svd(problem.A).singular_values, problem.lam)


def cmd_gen(args):
    if args.config:
        cfg = ExperimentConfig.load(args.config)
        seed = args.seed if args.seed is not None else cfg.seed
        problem = build_problem(cfg.problem, seed, cfg.base_dir)
    else:
        from mihs.problems import generate_problem, optimal_lambda
        problem = generate_problem(args.n, args.d, args.profile, args.kappa, args.noise,
                                   args.seed or 0, args.uniform_x)
        lam = optimal_lambda(problem) if args.lam == "optimal" else float(args.lam)
        problem = problem.with_lambda(lam)
    meta = save_problem(args.out, problem, args.name)
    print(json.dumps(meta, indent=2, sort_keys=True))
    return 0


def cmd_solve(args):
    problem = _load_problem(args)
    reference = problem.solution()
    if args.solver == "baseline_lsqr":
        report = baseline_lsqr(problem, args.iters, 1e-14, reference=reference)
        sd = None
    else:
        sd = _sd_of(problem)
        cfg = SolverConfig(m=resolve_size(args.m, sd, "--m"), sketch=args.sketch,
                           momentum=resolve_momentum("empirical", sd), iters=args.iters,
                           eps_sub=args.eps_sub, m2=resolve_size(args.m2, sd, "--m2"),
                           inner_iters=args.inner_iters, seed=args.seed or 0)
        report = SOLVERS[args.solver](problem, cfg, args.scheme, reference=reference)
    if args.out:
        write_matrix(args.out, report.x_final[:, None])
    if args.format == "csv":
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in report.records:
            w.writerow([0, r.iteration, r.flops, "", _fmt(r.error), _fmt(r.residual),
                        r.sub_iters])
        return 0
    last = report.records[-1] if report.records else None
    out = {
        "solver": report.solver,
        "n": problem.A.shape[0], "d": problem.A.shape[1], "lambda": problem.lam,
        "sd_exact": sd,
        "iterations": len(report.records),
        "final_rel_error": None if last is None else last.error,
        "final_residual": None if last is None else last.residual,
        "rate_estimate": report.converged_rate_estimate,
        "flops": report.flops.as_dict(),
        "subsolver_failures": report.sub_failures,
        "aborted": report.aborted,
        "message": report.message,
    }
    print(json.dumps(out, indent=2, sort_keys=True, default=float))
    return 0


def cmd_bench(args):
    if not args.config:
        raise UsageError("bench needs --config")
    cfg = ExperimentConfig.load(args.config)
    if args.trials is not None:
        if args.trials < 1:
            raise UsageError("--trials must be >= 1")
        cfg.trials = args.trials
    if args.seed is not None:
        cfg.seed = args.seed
    summary = run_experiment(cfg, out_dir=args.out)
    if args.format == "csv":
        for label, path in summary["files"].items():
            if label != "summary":
                print(path)
    else:
        print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_estimate(args):
    problem = _load_problem(args)
    if problem.lam <= 0:
        raise UsageError("estimate-sd needs a positive --lambda")
    sd = _sd_of(problem)
    n = problem.A.shape[0]
    m = min(resolve_size(args.m, sd, "--m"), n)
    seed = args.seed or 0
    SA = apply_sketch(build_sketch(args.sketch, n, m, seed), problem.A)
    est = hutchinson_sd(SA, problem.lam, args.samples, args.eps_tr, seed=seed)
    out = {"estimate": est.usable, "raw": est.raw, "clamped": est.value,
           "samples": est.samples, "eps_tr": est.eps_tr, "traces": est.traces, "m": m}
    if args.exact:
        out["sd_exact"] = sd
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def cmd_sketch(args):
    problem = _load_problem(args)
    n = problem.A.shape[0]
    m = resolve_size(args.m, _sd_of(problem) if "sd" in str(args.m) else 0.0, "--m")
    S = build_sketch(args.sketch, n, m, args.seed or 0)
    write_matrix(args.out, apply_sketch(S, problem.A),
                 comment=json.dumps(S.to_dict(), sort_keys=True))
    print(json.dumps(dict(S.to_dict(), out=str(args.out)), sort_keys=True))
    return 0


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "bench": cmd_bench,
            "estimate-sd": cmd_estimate, "sketch": cmd_sketch}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"mihs: error: {exc}", file=sys.stderr)
        return 1
    except (ParameterError, MatrixMarketError, OSError, ValueError) as exc:
        print(f"mihs: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
