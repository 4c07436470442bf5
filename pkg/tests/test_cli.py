"""Command line: exit codes, config precedence, CSV and JSON outputs."""

import json

import pytest

from stenzel_slag.cli import main
from stenzel_slag.pipeline import SCAN_COLUMNS

SMALL = ["--v-count", "3", "--h-grid", "4", "--grid-size", "2001", "--t-max", "12"]


def test_potential_command(tmp_path, capsys):
    out = tmp_path / "pot.json"
    assert main(["potential", "--n", "5", "--c", "1", "--out", str(out)]) == 0
    assert "u'(1) = 1.0" in capsys.readouterr().out
    assert json.loads(out.read_text())["n"] == 5


@pytest.mark.parametrize(
    "argv,flag",
    [
        (["potential", "--c", "-1"], "--c"),
        (["potential", "--n", "0"], "--n"),
        (["verify", "--example", "u1-l1", "--tol-omega", "2"], "--tol-omega"),
        (["verify", "--example", "nope"], "--example"),
        (["scan", "--example", "u1-l1", "--levels", "1:0"], "--levels"),
        (["verify", "--example", "so223", "--level", "0.3"], "--level"),
        (["verify", "--example", "u1-l1", "--n", "6"], "n = 5"),
    ],
)
def test_invalid_flags_exit_2(argv, flag, capsys):
    assert main(argv) == 2
    assert flag in capsys.readouterr().err


def test_verify_pass_and_report(tmp_path):
    report = tmp_path / "r.json"
    assert main(["verify", "--example", "u1-l1", "--level", "0.3", *SMALL, "--report", str(report)]) == 0
    data = json.loads(report.read_text())
    assert data["pass"] is True and data["example"] == "u1-l1"
    assert {c["name"] for c in data["checks"]} >= {"isotropy_swept", "angle_constancy", "phase"}
    assert data["counts"]["samples"] == 12


def test_verify_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["verify", "--example", "so223", "--c1", "0.2", "--c2", "-0.1", *SMALL, "--seed", "3", "--report", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_failed_check_exits_1(tmp_path):
    # a tolerance below machine precision cannot be met by the angle spread
    argv = ["verify", "--example", "u1-l1", "--level", "0.3", *SMALL, "--tol-angle", "1e-300"]
    assert main(argv) == 1


def test_empty_level_exits_4(capsys):
    assert main(["verify", "--example", "u1-l1", "--level", "1e7", *SMALL]) == 4
    assert "empty" in capsys.readouterr().out


def test_range_error_exits_3(capsys):
    # t_max too small for the sampled chart box
    assert main(["verify", "--example", "u1-l1", "--level", "0.3", "--v-count", "2", "--h-grid", "2", "--t-max", "0.5"]) == 3
    assert "range error" in capsys.readouterr().err


def test_io_error_exits_5(tmp_path):
    target = tmp_path / "missing" / "r.json"
    assert main(["verify", "--example", "u1-l1", "--level", "0.3", *SMALL, "--report", str(target)]) == 5
    assert main(["verify", "--config", str(tmp_path / "none.toml")]) == 5


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text(
        'example = "u1-l2"\nlevels = [[-0.5]]\n'
        "[ode]\nc = 2.0\nt_max = 14.0\ngrid_size = 2001\n"
        "[sampling]\nv_count = 2\nh_grid = 3\nseed = 5\n"
    )
    report = tmp_path / "r.json"
    assert main(["verify", "--config", str(cfg), "--c", "0.5", "--report", str(report)]) == 0
    data = json.loads(report.read_text())
    assert data["example"] == "u1-l2" and data["level"] == [-0.5]
    assert data["config"]["ode"]["c"] == 0.5  # flag wins
    assert data["config"]["sampling"]["seed"] == 5  # file value kept
    bad = tmp_path / "bad.toml"
    bad.write_text("[ode\n")
    assert main(["verify", "--config", str(bad)]) == 2
    bad.write_text("[ode]\nc = -1.0\n")
    assert main(["verify", "--config", str(bad)]) == 2


def test_scan_csv(tmp_path):
    out = tmp_path / "scan.csv"
    assert main(["scan", "--example", "u1-l1", "--levels", "-1:1:0.25", "--v-count", "2", "--h-grid", "2", "--grid-size", "2001", "--t-max", "12", "--out", str(out)]) == 0
    raw = out.read_bytes()
    assert b"\r\n" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == ",".join(SCAN_COLUMNS)
    assert len(lines) == 10


@pytest.mark.parametrize("what,header", [("samples", "example,h1"), ("angle-series", "index,theta_mod_pi")])
def test_export(tmp_path, what, header):
    out = tmp_path / "x.csv"
    assert main(["export", "--example", "u1-l1", "--level", "0.3", *SMALL, "--what", what, "--out", str(out)]) == 0
    raw = out.read_bytes()
    assert b"\r\n" not in raw
    lines = raw.decode().splitlines()
    assert lines[0].startswith(header) and len(lines) == 13
    theta = [float(row.split(",")[-1]) for row in lines[1:]]
    assert max(theta) - min(theta) < 1e-7
