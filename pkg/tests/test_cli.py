"""CLI commands, config merging, exit codes, reproducible outputs."""
import json

import pytest

from oscdecay.cli import (
    EXIT_CONFIG,
    EXIT_MATH,
    EXIT_OK,
    EXIT_VERIFY,
    json_text,
    main,
)


def run(args):
    return main(args)


def test_analyze_xy(tmp_path):
    code = run(["analyze", "--phase", "x*y", "--out-dir", str(tmp_path)])
    assert code == EXIT_OK
    doc = json.loads((tmp_path / "analysis.json").read_text())
    assert doc["phase"] == "x*y"
    assert doc["hessian"] == "1"
    (rep,) = doc["reports"]
    assert rep["p_r"] == "2" and rep["decay_r"] == "1/2"
    assert doc["crosscheck"]["ok"] is True


def test_analyze_two_vertex_phase(tmp_path):
    code = run(["analyze", "--phase", "x^3*y + x*y^3", "--out-dir", str(tmp_path)])
    assert code == EXIT_OK
    doc = json.loads((tmp_path / "analysis.json").read_text())
    pairs = [(r["p_r"], r["decay_r"]) for r in doc["reports"]]
    assert pairs == [("4", "1/4"), ("4/3", "1/4")]
    assert doc["special_form"] is None
    tree = doc["cluster_tree"]
    assert tree["total_nontrivial"] == 2
    assert tree["groups"][0]["exponent"] == "1"


def test_analyze_split_phase_fails(tmp_path, capsys):
    code = run(["analyze", "--phase", "x^3 + y^2", "--out-dir", str(tmp_path)])
    assert code == EXIT_MATH
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "math"


def test_analyze_special_form(tmp_path):
    code = run([
        "analyze", "--phase", "1/3*x^3*y - 1/2*x^2*y^2 + 1/3*x*y^3",
        "--out-dir", str(tmp_path),
    ])
    assert code == EXIT_OK
    doc = json.loads((tmp_path / "analysis.json").read_text())
    assert doc["special_form"]["power"] == 2


def test_bad_phase_exit_code(tmp_path, capsys):
    assert run(["analyze", "--phase", "x*z", "--out-dir", str(tmp_path)]) == EXIT_MATH
    assert run(["analyze", "--phase", "x*", "--out-dir", str(tmp_path)]) == EXIT_MATH


def test_missing_phase_is_config_error(tmp_path, capsys):
    assert run(["analyze", "--out-dir", str(tmp_path)]) == EXIT_CONFIG
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "config"


def test_sweep_writes_csv_and_fit(tmp_path):
    code = run([
        "sweep", "--phase", "x*y", "--lambda-min", "30", "--lambda-max", "120",
        "--lambda-count", "6", "--grid-budget", "512", "--out-dir", str(tmp_path),
    ])
    assert code == EXIT_OK
    csv = (tmp_path / "sweep.csv").read_text()
    assert csv.splitlines()[0] == "lambda,norm,p,status"
    assert len(csv.splitlines()) == 7
    fit = json.loads((tmp_path / "sweep_fit.json").read_text())
    assert fit["n_samples"] == 6
    assert fit["slope"] < 0


def test_sweep_byte_identical_reruns(tmp_path):
    args = [
        "sweep", "--phase", "x^2*y", "--lambda-min", "30", "--lambda-max", "90",
        "--lambda-count", "6", "--grid-budget", "512", "--seed", "11",
    ]
    run(args + ["--out-dir", str(tmp_path / "a")])
    run(args + ["--out-dir", str(tmp_path / "b")])
    assert (tmp_path / "a/sweep.csv").read_bytes() == (tmp_path / "b/sweep.csv").read_bytes()
    assert (
        tmp_path / "a/sweep_fit.json"
    ).read_bytes() == (tmp_path / "b/sweep_fit.json").read_bytes()


def test_sweep_budget_too_small(tmp_path):
    code = run([
        "sweep", "--phase", "x*y", "--lambda-min", "1000", "--lambda-max", "100000",
        "--lambda-count", "8", "--grid-budget", "256", "--out-dir", str(tmp_path),
    ])
    assert code == EXIT_MATH  # fewer than 6 valid samples
    csv = (tmp_path / "sweep.csv").read_text()
    assert "budget_exceeded" in csv


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "phase = x*y\nlambda_min = 30\nlambda-max = 120\nlambda_count = 6\n"
        "grid_budget = 512\nseed = 3\n# comment\n"
    )
    out1 = tmp_path / "c1"
    code = run(["sweep", "--config", str(cfg), "--out-dir", str(out1)])
    assert code == EXIT_OK
    # flag overrides the config value
    out2 = tmp_path / "c2"
    code = run([
        "sweep", "--config", str(cfg), "--lambda-count", "7", "--out-dir", str(out2),
    ])
    assert code == EXIT_OK
    assert len((out2 / "sweep.csv").read_text().splitlines()) == 8


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("phasing = x*y\n")
    assert run(["sweep", "--config", str(cfg)]) == EXIT_CONFIG


def test_damped_sweep_flags(tmp_path):
    code = run([
        "sweep", "--phase", "x^2*y^2", "--damped", "--vertex", "0", "--re-z", "0",
        "--lambda-min", "30", "--lambda-max", "90", "--lambda-count", "6",
        "--grid-budget", "512", "--out-dir", str(tmp_path),
    ])
    assert code == EXIT_OK
    fit = json.loads((tmp_path / "sweep_fit.json").read_text())
    assert fit["n_samples"] == 6


def test_verify_quick_on_split_phase(tmp_path):
    code = run(["verify", "--phase", "x^3 + y^2", "--out-dir", str(tmp_path)])
    assert code == EXIT_VERIFY
    doc = json.loads((tmp_path / "verify.json").read_text())
    failing = [c for c in doc["checks"] if c["status"] == "fail"]
    assert len(failing) == 1
    assert "splits" in failing[0]["note"]


def test_json_text_formats_17_digits():
    text = json_text({"v": 1.0 / 3.0})
    assert "0.33333333333333331" in text
    assert json_text(float("nan")) == "null"
