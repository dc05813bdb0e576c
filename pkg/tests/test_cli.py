import math
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

import cli
import db
from config import config
from errors import EXIT_COMPARE, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, ArgumentError, NumericalError
from cli import SweepConfig, compare_rows, parse_angle, parse_kappa_grid, run_sweep

ROOT = Path(__file__).resolve().parent.parent


def run_cli(*args: str) -> subprocess.CompletedProcess:
    cmd = [sys.executable, str(ROOT / "cli.py"), *args]
    return subprocess.run(cmd, capture_output=True, text=True, cwd=ROOT)


def read(path: Path) -> pd.DataFrame:
    return pd.read_csv(path)


# ==================== 参数解析 ====================

@pytest.mark.parametrize("text,expected", [
    ("pi/4", math.pi / 4),
    ("3pi/4", 3 * math.pi / 4),
    ("3*pi/2", 3 * math.pi / 2),
    ("-pi", -math.pi),
    ("2π", 2 * math.pi),
    ("pi", math.pi),
    ("0.5", 0.5),
    ("0", 0.0),
])
def test_parse_angle(text, expected):
    assert parse_angle(text) == expected


@pytest.mark.parametrize("text", ["pie", "pi/0", "pi*2", "abc", "3/pi"])
def test_parse_angle_rejects_garbage(text):
    with pytest.raises(ArgumentError):
        parse_angle(text)


def test_parse_kappa_grid():
    assert parse_kappa_grid("0.001,1,31") == (0.001, 1.0, 31)
    with pytest.raises(ArgumentError):
        parse_kappa_grid("0.001,1")
    with pytest.raises(ArgumentError):
        parse_kappa_grid("a,b,c")


# ==================== sweep ====================

def test_help():
    cp = run_cli("--help")
    assert cp.returncode == 0, cp.stderr
    assert "sweep" in cp.stdout and "compare" in cp.stdout


def test_sweep_monogamy_without_loss(tmp_path):
    out = tmp_path / "mono.csv"
    cp = run_cli("sweep", "--scenario", "monogamy", "--gt-steps", "9", "--out", str(out))
    assert cp.returncode == 0, cp.stderr
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(config.CSV_HEADER)
    assert len(lines) == 1 + 9 * 4
    df = read(out)
    cc = df[df["quantity"] == "C_C1C2"]
    # gt 列同样按 9 位有效数字输出
    assert np.allclose(cc["value"], np.abs(np.cos(cc["gt"])), rtol=0, atol=1e-8)
    assert (df["method"] == "analytic").all()
    assert (df["scenario"] == "monogamy").all()


def test_sweep_csv_format(tmp_path):
    out = tmp_path / "swap.csv"
    cp = run_cli("sweep", "--scenario", "swap", "--gt-steps", "5", "--out", str(out))
    assert cp.returncode == 0, cp.stderr
    raw = out.read_bytes()
    assert b"\r" not in raw
    assert raw.endswith(b"\n")
    for line in raw.decode().splitlines():
        assert line == line.rstrip()
    df = read(out)
    half_pi = df[(np.isclose(df["gt"], math.pi / 2)) & (df["quantity"] == "C_A1A2")]
    assert len(half_pi) == 1
    assert half_pi["value"].iloc[0] == 1.0
    assert "1.57079633" in raw.decode()


def test_sweep_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "--scenario", "ckw", "--gt-steps", "17", "--kappa1", "0.1", "--kappa2", "0.1"]
    assert run_cli(*args, "--out", str(a)).returncode == 0
    assert run_cli(*args, "--out", str(b)).returncode == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_both_methods_grid_integrity(tmp_path):
    out = tmp_path / "both.csv"
    cp = run_cli("sweep", "--scenario", "swap", "--gt-max", "pi", "--gt-steps", "7",
                 "--kappa1", "0.05", "--kappa2", "0.05", "--method", "both", "--out", str(out))
    assert cp.returncode == 0, cp.stderr
    df = read(out)
    assert len(df) == 7 * 2 * 2
    for _, grp in df.groupby(["quantity", "method"]):
        assert np.all(np.diff(grp["gt"].to_numpy()) > 0)
    conc = df[df["quantity"].str.startswith("C_")]["value"]
    assert ((conc >= 0) & (conc <= 1 + 1e-9)).all()


def test_sweep_fig5(tmp_path):
    out = tmp_path / "fig5.csv"
    cp = run_cli("sweep", "--scenario", "fig5", "--fig5-gt", "pi/4", "--kappa-grid", "0.001,1,31", "--out", str(out))
    assert cp.returncode == 0, cp.stderr
    df = read(out)
    assert len(df) == 31
    assert (df["quantity"] == "C_A1C1").all()
    values = df["value"].to_numpy()
    assert np.all(np.diff(values[:20]) > 0)


def test_sweep_to_stdout():
    cp = run_cli("sweep", "--scenario", "swap", "--gt-steps", "3")
    assert cp.returncode == 0, cp.stderr
    assert cp.stdout.splitlines()[0] == ",".join(config.CSV_HEADER)
    assert len(cp.stdout.splitlines()) == 1 + 3 * 2


@pytest.mark.parametrize("args", [
    ["sweep", "--gt-steps", "1"],
    ["sweep", "--gt-min", "2", "--gt-max", "1"],
    ["sweep", "--kappa1", "-0.1"],
    ["sweep", "--scenario", "triangle"],
    ["sweep", "--gt-max", "twopi"],
    ["sweep", "--method", "numeric", "--dt", "0.05"],
    ["sweep", "--scenario", "fig5", "--kappa-grid", "0,1,5"],
    ["compare", "--kappa1", "0.2", "--kappa2", "0.2"],
    ["launch"],
])
def test_usage_errors_exit_one(tmp_path, args):
    cp = run_cli(*args, "--out", str(tmp_path / "x.csv")) if args[0] != "launch" else run_cli(*args)
    assert cp.returncode == EXIT_USAGE, cp.stderr


def test_numerical_failure_exit_two(monkeypatch):
    def broken(*args, **kwargs):
        raise NumericalError("正定性破坏", time=1.0)

    monkeypatch.setitem(cli.CURVES, "monogamy", broken)
    code, rows = run_sweep(SweepConfig(scenario="monogamy", gt_steps=3))
    assert code == EXIT_NUMERICAL
    assert rows == 0


def test_in_process_sweep_matches_row_count(tmp_path):
    out = tmp_path / "in.csv"
    code, rows = run_sweep(SweepConfig(scenario="ckw", gt_steps=11, kappa1_over_g=0.1, kappa2_over_g=0.1, out=str(out)))
    assert code == EXIT_OK
    assert rows == 11 * 3
    assert len(out.read_text().splitlines()) == 1 + rows


# ==================== compare ====================

def test_compare_without_loss_passes(tmp_path):
    out = tmp_path / "cmp.csv"
    cp = run_cli("compare", "--scenario", "monogamy", "--gt-steps", "21", "--tolerance", "1e-6", "--out", str(out))
    assert cp.returncode == EXIT_OK, cp.stdout + cp.stderr
    assert "max_abs_diff" in cp.stdout
    df = read(out)
    assert set(df["method"]) == {"analytic", "numeric"}
    assert len(df) == 21 * 4 * 2


def test_compare_uses_frozen_bound_with_loss():
    cp = run_cli("compare", "--scenario", "monogamy", "--gt-steps", "41",
                 "--kappa1", "0.1", "--kappa2", "0.1", "--alpha-mode", "limit-consistent")
    assert cp.returncode == EXIT_OK, cp.stdout + cp.stderr
    assert "tolerance=0.21" in cp.stdout


def test_compare_flags_alpha5_discrepancy():
    cp = run_cli("compare", "--scenario", "monogamy", "--gt-steps", "41",
                 "--kappa1", "0.1", "--kappa2", "0.1", "--tolerance", "1e-3")
    assert cp.returncode == EXIT_COMPARE, cp.stdout + cp.stderr
    flagged = [line.split() for line in cp.stdout.splitlines() if line.split()[:1] == ["C_C1A1"]]
    assert flagged and flagged[0][-1] == "FAIL"


def test_compare_report_skips_trace():
    cfg = SweepConfig(scenario="monogamy", gt_steps=5, method="both")
    report = compare_rows(cli.compute_rows(cfg))
    assert list(report["quantity"]) == ["C_C1C2", "C_C2A1", "C_C1A1"]
    assert (report["max_abs_diff"] < 1e-6).all()


# ==================== 台账 ====================

def test_ledger_records_run(tmp_path):
    path = tmp_path / "runs.db"
    out = tmp_path / "s.csv"
    cp = run_cli("sweep", "--scenario", "swap", "--gt-steps", "4", "--out", str(out), "--db", str(path))
    assert cp.returncode == 0, cp.stderr
    assert os.path.exists(path)
    db.init_db(str(path))
    try:
        runs = db.fetch_runs()
        logs = db.fetch_logs()
    finally:
        db.close_db()
    assert runs[0]["command"] == "sweep"
    assert runs[0]["exit_code"] == 0
    assert runs[0]["rows"] == 8
    assert "--db" in runs[0]["argv"]
    assert any(str(out) in r["message"] for r in logs)
