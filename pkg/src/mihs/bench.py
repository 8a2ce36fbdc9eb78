"""Experiment orchestration: problem x solvers x Monte-Carlo trials -> CSV/JSON.

An experiment config is a JSON object::

    {
      "seed": 7,                       # root seed; every random draw derives from it
      "trials": 32,
      "problem": {"n": 2048, "d": 64, "profile": "philips", "kappa": 1e6,
                  "noise_level": 0.01, "lambda": "optimal", "uniform_x": false},
      # or  "problem": {"path": "problem.json"}  (sidecar written by `mihs gen`)
      "solvers": [
        {"name": "m_ihs", "scheme": "inexact", "sketch": "gaussian", "m": "2sd",
         "iters": 30, "eps_sub": 0.1, "momentum": "empirical"},
        {"name": "baseline_lsqr", "iters": 200, "tol": 1e-14}
      ],
      "eta": [1e-2, 1e-4, 1e-6],
      "output": {"dir": "out", "prefix": "run"},
      "workers": 1,
      "record_wall_time": false
    }

Sketch sizes may be integers or multiples of the exact statistical dimension
("2sd"); momentum is "empirical" (beta = sd/m), {"eps": e} for the theoretical
rule, or {"alpha": a, "beta": b}. CSV rows are ordered by (trial, iteration)
within each solver file regardless of how cells were scheduled. Wall time is
left blank unless ``record_wall_time`` is set, so that reruns are byte-identical.
"""
from __future__ import annotations

import csv
import io
import json
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from mihs.errors import ConfigError, ParameterError
from mihs.estimate import sd_exact
from mihs.linalg import child_seed, compact_svd
from mihs.problems import Problem, generate_problem, load_problem, optimal_lambda
from mihs.solvers import (SOLVERS, Empirical, MomentumParams, SolverConfig, Theoretical,
                          baseline_lsqr)

CSV_COLUMNS = ("trial", "iteration", "cumulative_flops", "wall_time_s",
               "rel_error_to_reference", "residual", "subsolver_iters")
SOLVER_NAMES = tuple(SOLVERS) + ("baseline_lsqr",)
_SD_MULT = re.compile(r"^\s*([0-9]*\.?[0-9]+)\s*sd\s*$")


@dataclass
class SolverSpec:
    name: str
    label: str
    scheme: str = "inexact"
    sketch: str = "gaussian"
    m: object = "2sd"
    m2: object = None
    iters: int = 20
    inner_iters: int = 25
    eps_sub: float = 0.1
    momentum: object = "empirical"
    osnap_s: int = 1
    tol: float = 1e-14

    @classmethod
    def from_dict(cls, data: dict) -> "SolverSpec":
        data = dict(data)
        name = data.pop("name", None)
        if name not in SOLVER_NAMES:
            raise ConfigError(f"unknown solver {name!r}; choose from {', '.join(SOLVER_NAMES)}")
        label = data.pop("label", None) or name
        known = set(cls.__dataclass_fields__) - {"name", "label"}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown solver keys: {sorted(extra)}")
        return cls(name=name, label=label, **data)


@dataclass
class ExperimentConfig:
    problem: dict
    solvers: list
    seed: int = 0
    trials: int = 32
    eta: list = field(default_factory=lambda: [1e-2, 1e-4, 1e-6])
    out_dir: str = "out"
    prefix: str = "run"
    workers: int = 1
    record_wall_time: bool = False
    base_dir: str = "."

    def __post_init__(self):
        if int(self.trials) < 1:
            raise ConfigError("trials must be >= 1")
        if not self.solvers:
            raise ConfigError("at least one solver is required")
        self.solvers = [s if isinstance(s, SolverSpec) else SolverSpec.from_dict(s)
                        for s in self.solvers]
        labels = [s.label for s in self.solvers]
        if len(set(labels)) != len(labels):
            raise ConfigError("solver labels must be unique")
        if int(self.seed) < 0:
            raise ConfigError("seed must be nonnegative")

    @classmethod
    def from_dict(cls, data: dict, base_dir=".") -> "ExperimentConfig":
        data = dict(data)
        out = data.pop("output", {}) or {}
        known = {"problem", "solvers", "seed", "trials", "eta", "workers", "record_wall_time"}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        if "problem" not in data or "solvers" not in data:
            raise ConfigError("config needs 'problem' and 'solvers'")
        return cls(problem=data["problem"], solvers=data["solvers"],
                   seed=int(data.get("seed", 0)), trials=int(data.get("trials", 32)),
                   eta=list(data.get("eta", [1e-2, 1e-4, 1e-6])),
                   out_dir=out.get("dir", "out"), prefix=out.get("prefix", "run"),
                   workers=int(data.get("workers", 1)),
                   record_wall_time=bool(data.get("record_wall_time", False)),
                   base_dir=str(base_dir))

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data, base_dir=path.parent)


def build_problem(spec: dict, seed: int, base_dir=".") -> Problem:
    """Materialize the problem described by a config's ``problem`` block."""
    spec = dict(spec)
    if "path" in spec:
        problem = load_problem(Path(base_dir) / spec["path"])
    else:
        try:
            problem = generate_problem(int(spec["n"]), int(spec["d"]),
                                       spec.get("profile", "philips"),
                                       float(spec.get("kappa", 1e6)),
                                       float(spec.get("noise_level", 0.01)),
                                       int(spec.get("seed", child_seed(seed, 0))),
                                       bool(spec.get("uniform_x", False)))
        except KeyError as exc:
            raise ConfigError(f"problem block missing {exc}") from None
    lam = spec.get("lambda", "optimal" if problem.x_true is not None else problem.lam)
    if lam == "optimal":
        lam = optimal_lambda(problem)
    return problem.with_lambda(float(lam))


def resolve_size(value, sd: float, what: str) -> int:
    if value is None:
        return None
    if isinstance(value, str):
        if value.strip().isdigit():
            return int(value)
        match = _SD_MULT.match(value)
        if not match:
            raise ConfigError(f"{what}: expected an integer or '<k>sd', got {value!r}")
        return max(1, math.ceil(float(match.group(1)) * sd))
    return int(value)


def resolve_momentum(value, sd: float):
    if value == "empirical":
        return Empirical(sd)
    if isinstance(value, dict) and "eps" in value:
        return Theoretical(float(value["eps"]))
    if isinstance(value, dict) and {"alpha", "beta"} <= set(value):
        return MomentumParams(float(value["alpha"]), float(value["beta"]))
    raise ConfigError(f"cannot interpret momentum {value!r}")


def _run_cell(problem: Problem, spec: SolverSpec, sd: float, reference, seed: int):
    """One (solver, trial) cell. Returns (records, aborted, message)."""
    try:
        if spec.name == "baseline_lsqr":
            report = baseline_lsqr(problem, spec.iters, spec.tol, reference=reference)
        else:
            cfg = SolverConfig(m=resolve_size(spec.m, sd, "m"), sketch=spec.sketch,
                               momentum=resolve_momentum(spec.momentum, sd),
                               iters=spec.iters, eps_sub=spec.eps_sub,
                               m2=resolve_size(spec.m2, sd, "m2"),
                               inner_iters=spec.inner_iters, seed=seed,
                               osnap_s=spec.osnap_s)
            report = SOLVERS[spec.name](problem, cfg, spec.scheme, reference=reference)
    except ParameterError as exc:
        return [], True, str(exc)
    return report.records, report.aborted, report.message


def _cell_job(args):
    return _run_cell(*args)


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _check_writable(out_dir: Path) -> None:
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        probe = out_dir / ".mihs_write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {out_dir} is not writable: {exc}") from exc


def _flops_to_eta(records, eta):
    for r in records:
        if r.error <= eta:
            return r.flops
    return None


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> dict:
    """Run every (solver, trial) cell and write ``<prefix>_<label>.csv`` files plus
    ``<prefix>_summary.json``. Returns the summary dict (with output paths)."""
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    _check_writable(out)
    problem = build_problem(cfg.problem, cfg.seed, cfg.base_dir)
    sigma = compact_svd(problem.A).singular_values
    sd = sd_exact(sigma, problem.lam)
    reference = problem.solution()

    cells = [(i, t) for i in range(len(cfg.solvers)) for t in range(cfg.trials)]
    jobs = [(problem, cfg.solvers[i], sd, reference, child_seed(cfg.seed, 1, i, t))
            for i, t in cells]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_cell_job, jobs))
    else:
        results = [_run_cell(*job) for job in jobs]
    by_key = dict(zip(cells, results))

    summary = {
        "problem": dict(problem.metadata, n=problem.A.shape[0], d=problem.A.shape[1],
                        lam=problem.lam),
        "sd_exact": sd,
        "seed": cfg.seed,
        "trials": cfg.trials,
        "solvers": {},
        "files": {},
    }
    for i, spec in enumerate(cfg.solvers):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        rates, flagged = [], []
        eta_table = {repr(float(e)): [] for e in cfg.eta}
        for t in range(cfg.trials):
            records, aborted, message = by_key[(i, t)]
            if aborted:
                flagged.append({"trial": t, "message": message})
            for r in records:
                writer.writerow([t, r.iteration, _fmt(r.flops),
                                 _fmt(r.wall_time) if cfg.record_wall_time else "",
                                 _fmt(r.error), _fmt(r.residual), _fmt(r.sub_iters)])
            errs = np.array([r.error for r in records])
            if errs.size >= 2:
                tail = errs[len(errs) - max(2, len(errs) // 3):]
                with np.errstate(divide="ignore", invalid="ignore"):
                    ratio = tail[1:] / tail[:-1]
                ratio = ratio[np.isfinite(ratio)]
                if ratio.size:
                    rates.append(float(np.median(ratio)))
            for e in cfg.eta:
                eta_table[repr(float(e))].append(_flops_to_eta(records, e))
        path = out / f"{cfg.prefix}_{spec.label}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(buf.getvalue())
        summary["files"][spec.label] = str(path)
        summary["solvers"][spec.label] = {
            "solver": spec.name,
            "scheme": spec.scheme if spec.name != "baseline_lsqr" else None,
            "median_rate": float(np.median(rates)) if rates else None,
            "flops_to_eta": {k: _median_or_none(v) for k, v in eta_table.items()},
            "aborted": flagged,
        }
    spath = out / f"{cfg.prefix}_summary.json"
    with open(spath, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    summary["files"]["summary"] = str(spath)
    return summary


def _median_or_none(values):
    # flops to reach eta: median over trials that got there; None if fewer than half did
    hit = sorted(v for v in values if v is not None)
    if len(hit) * 2 < len(values) or not hit:
        return None
    return int(np.median(hit))
