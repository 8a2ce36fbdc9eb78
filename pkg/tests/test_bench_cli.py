import csv
import json

import numpy as np
import pytest

from mihs.bench import CSV_COLUMNS, ConfigError, ExperimentConfig, resolve_size, run_experiment
from mihs.cli import main
from mihs.problems import Problem, save_problem

HEADER = "trial,iteration,cumulative_flops,wall_time_s,rel_error_to_reference,residual,subsolver_iters"

SMALL = {
    "seed": 5,
    "trials": 2,
    "problem": {"n": 200, "d": 20, "profile": "philips", "kappa": 1e4, "noise_level": 0.01},
    "solvers": [
        {"name": "m_ihs", "scheme": "inexact", "m": "3sd", "iters": 6},
        {"name": "m_ihs", "label": "exact_cs", "scheme": "exact", "sketch": "countsketch",
         "m": 60, "iters": 6, "momentum": {"eps": 0.5}},
        {"name": "pd_m_ihs_over", "m": "3sd", "m2": 20, "iters": 4, "inner_iters": 3},
        {"name": "baseline_lsqr", "iters": 8},
    ],
    "eta": [1e-2],
}


def write_config(path, data):
    path.write_text(json.dumps(data))
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_csv_schema_golden(tmp_path):
    summary = run_experiment(ExperimentConfig.from_dict(SMALL), out_dir=tmp_path)
    assert ",".join(CSV_COLUMNS) == HEADER
    for label in ("m_ihs", "exact_cs", "pd_m_ihs_over", "baseline_lsqr"):
        raw = (tmp_path / f"run_{label}.csv").read_bytes()
        assert b"\r" not in raw
        rows = read_csv(tmp_path / f"run_{label}.csv")
        assert ",".join(rows[0]) == HEADER
        assert all(len(r) == 7 for r in rows)
        assert {r[0] for r in rows[1:]} == {"0", "1"}
        assert all(r[3] == "" for r in rows[1:])
        for r in rows[1:]:
            int(r[1]), int(r[2]), float(r[4]), float(r[5]), int(r[6])
    assert summary["solvers"]["m_ihs"]["median_rate"] < 1
    js = json.loads((tmp_path / "run_summary.json").read_text())
    assert set(js["solvers"]) == {"m_ihs", "exact_cs", "pd_m_ihs_over", "baseline_lsqr"}
    assert list(js["solvers"]["m_ihs"]["flops_to_eta"]) == ["0.01"]


def test_rerun_is_byte_identical(tmp_path):
    cfg = ExperimentConfig.from_dict(SMALL)
    run_experiment(cfg, out_dir=tmp_path / "a")
    run_experiment(cfg, out_dir=tmp_path / "b")
    for f in sorted((tmp_path / "a").glob("*.csv")):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes(), f.name
    # the summary differs only in the output paths it lists
    a, b = (json.loads((tmp_path / d / "run_summary.json").read_text()) for d in "ab")
    a.pop("files"), b.pop("files")
    assert a == b


def test_parallel_matches_serial(tmp_path):
    data = dict(SMALL, workers=2)
    run_experiment(ExperimentConfig.from_dict(SMALL), out_dir=tmp_path / "a")
    run_experiment(ExperimentConfig.from_dict(data), out_dir=tmp_path / "b")
    for f in sorted((tmp_path / "a").glob("*.csv")):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_identity_problem_baseline(tmp_path):
    b = np.arange(1.0, 6.0)
    save_problem(tmp_path, Problem(np.eye(5), b, b.copy()), "eye")
    cfg = {"trials": 1, "problem": {"path": "eye.json", "lambda": 0.0},
           "solvers": [{"name": "baseline_lsqr", "iters": 5}]}
    path = write_config(tmp_path / "cfg.json", cfg)
    run_experiment(ExperimentConfig.load(path), out_dir=tmp_path / "out")
    rows = read_csv(tmp_path / "out" / "run_baseline_lsqr.csv")
    assert len(rows) == 2
    assert rows[1][:2] == ["0", "1"] and float(rows[1][4]) == 0.0


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(dict(SMALL, colour="red"))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(dict(SMALL, solvers=[{"name": "gmres"}]))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(dict(SMALL, solvers=[{"name": "m_ihs", "speed": 1}]))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(dict(SMALL, trials=0))
    with pytest.raises(ConfigError):
        ExperimentConfig.load(tmp_path / "missing.json")
    with pytest.raises(ConfigError):
        resolve_size("twice", 3.0, "m")
    assert resolve_size("2.5sd", 4.0, "m") == 10
    assert resolve_size("12", 4.0, "m") == 12


@pytest.mark.filterwarnings("ignore:dual_m_ihs is meant")
def test_aborted_cell_is_reported(tmp_path):
    data = dict(SMALL, solvers=[{"name": "dual_m_ihs", "m": 500}], trials=1)
    summary = run_experiment(ExperimentConfig.from_dict(data), out_dir=tmp_path)
    assert summary["solvers"]["dual_m_ihs"]["aborted"]


# -- CLI ---------------------------------------------------------------------------

def test_cli_solve_tiny(capsys):
    assert main(["solve", "--iters", "20", "--seed", "3"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["final_residual"] < 1e-4
    assert out["iterations"] == 20


def test_cli_solve_csv_and_out(tmp_path, capsys):
    dest = tmp_path / "x.mtx"
    assert main(["solve", "--solver", "baseline_lsqr", "--iters", "4", "--format", "csv",
                 "--out", str(dest)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == HEADER and len(lines) == 5
    assert dest.exists()


def test_cli_bench_trials(tmp_path, capsys):
    cfg = write_config(tmp_path / "cfg.json", SMALL)
    assert main(["bench", "--config", str(cfg), "--trials", "4", "--out", str(tmp_path / "o"),
                 "--format", "csv"]) == 0
    rows = read_csv(tmp_path / "o" / "run_m_ihs.csv")
    assert {r[0] for r in rows[1:]} == {"0", "1", "2", "3"}
    assert len(rows) == 1 + 4 * 6


@pytest.mark.filterwarnings("ignore:dual_m_ihs is meant")
def test_cli_gen_then_solve(tmp_path, capsys):
    assert main(["gen", "--out", str(tmp_path), "--n", "120", "--d", "10", "--kappa", "100",
                 "--seed", "4", "--name", "g"]) == 0
    capsys.readouterr()
    assert main(["solve", "--problem", str(tmp_path / "g.json"), "--solver", "dual_m_ihs",
                 "--m", "10", "--lambda", "0.5", "--iters", "3"]) == 0
    assert json.loads(capsys.readouterr().out)["lambda"] == 0.5


def test_cli_estimate_and_sketch(tmp_path, capsys):
    assert main(["estimate-sd", "--exact", "--samples", "16"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert abs(out["estimate"] - out["sd_exact"]) < 0.5 * out["sd_exact"]
    dest = tmp_path / "sa.mtx"
    assert main(["sketch", "--m", "8", "--out", str(dest), "--sketch", "countsketch"]) == 0
    from mihs.mmio import read_matrix
    assert read_matrix(dest).shape == (8, 16)


@pytest.mark.parametrize("argv", [
    [], ["frobnicate"], ["solve", "--solver", "gmres"], ["solve", "--wat"],
    ["bench"], ["solve", "--seed", "-1"], ["bench", "--config", "/nonexistent.json"],
])
def test_cli_usage_errors_exit_1(argv, capsys):
    assert main(argv) == 1


def test_cli_runtime_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "p.json"
    bad.write_text(json.dumps({"files": {"A": "A.mtx", "b": "b.mtx"}}))
    (tmp_path / "A.mtx").write_text("garbage\n")
    (tmp_path / "b.mtx").write_text("garbage\n")
    assert main(["solve", "--problem", str(bad)]) == 2
    assert "line 1" in capsys.readouterr().err
    assert main(["solve", "--solver", "dual_m_ihs", "--lambda", "0"]) == 2
