import json
import math
import subprocess

import pytest

from akscan import cli, scan
from akscan.errors import NumericFailure

SMALL = ["--r-min", "-1", "--r-max", "1", "--r-steps", "2", "--theta-min", "0", "--theta-max", "pi:0.5", "--theta-steps", "2"]


def test_angle_parser():
    assert cli.angle("pi:0.25") == pytest.approx(math.pi / 4)
    assert cli.angle("1.5") == 1.5
    with pytest.raises(Exception):
        cli.angle("pi:x")


def test_sweep_to_file_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.run(["sweep", *SMALL, "--out", str(a)]) == 0
    assert cli.run(["sweep", *SMALL, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 1 + 4
    assert "g branches" in capsys.readouterr().err


def test_sweep_json_stdout(capsys):
    assert cli.run(["sweep", *SMALL, "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert len(data) == 4 and data[0]["giedke_class"] == "C1"


def test_sweep_unwritable_path(tmp_path, capsys):
    assert cli.run(["sweep", *SMALL, "--out", str(tmp_path / "missing" / "x.csv")]) == 1
    assert "cannot write" in capsys.readouterr().err


def test_sweep_bad_grid_is_usage_error(capsys):
    assert cli.run(["sweep", "--r-steps", "1"]) == 2


def test_point_json(capsys):
    assert cli.run(["point", "--r", "0", "--theta", "0"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["giedke_class"] == "C1"
    assert rep["renyi2"]["reduced"]["1|3"] == pytest.approx(math.log(5 / 3), abs=1e-12)


def test_point_displacement_and_period(capsys):
    outs = []
    for args in (["--r", "0.7", "--theta", "0.2"],
                 ["--r", "0.7", "--theta", "0.2", "--q", "3", "--p", "-2"]):
        cli.run(["point", *args])
        outs.append(json.loads(capsys.readouterr().out))
    assert outs[0]["renyi2"] == outs[1]["renyi2"]
    assert outs[0]["ppt_spectra"] == outs[1]["ppt_spectra"]


def test_point_csv(capsys):
    assert cli.run(["point", "--r", "0", "--theta", "pi:0.25", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("r,theta,") and len(lines) == 2


def test_verify_exit_codes(capsys):
    assert cli.run(["verify", "--r-steps", "5", "--theta-steps", "5"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == len(out.splitlines())
    assert cli.run(["verify", "--r-steps", "5", "--theta-steps", "5", "--inject-fault", "eps23-sign"]) == 1
    captured = capsys.readouterr()
    assert "FAIL oracle_equivalence" in captured.out and "oracle_equivalence" in captured.err
    assert cli.run(["verify", "--r-steps", "5", "--theta-steps", "5", "--tol", "1e-15"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_fault_flag_is_hidden(capsys):
    with pytest.raises(SystemExit):
        cli.run(["verify", "--help"])
    assert "inject" not in capsys.readouterr().out


def test_extremize_pinned(capsys):
    assert cli.run(["extremize", "--quantity", "E_ds", "--mode", "min", "--r", "5"]) == 0
    out = capsys.readouterr().out
    value = float(out.split("=")[1].split()[0])
    assert value == pytest.approx(0.5 * math.log(2), abs=1e-4)


def test_extremize_unknown_quantity(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.run(["extremize", "--quantity", "bogus"])
    assert exc.value.code == 2


def test_numeric_failure_exit_code(monkeypatch, capsys):
    def boom(*args, **kwargs):
        raise NumericFailure("eigensolver did not converge")

    monkeypatch.setattr(scan, "point_report", boom)
    assert cli.run(["point"]) == 3
    assert "numeric failure" in capsys.readouterr().err


def test_console_script_installed():
    proc = subprocess.run(["ak-scan", "point", "--r", "0", "--format", "csv"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("r,theta,")
    proc = subprocess.run(["ak-scan", "frobnicate"], capture_output=True, text=True)
    assert proc.returncode == 2
