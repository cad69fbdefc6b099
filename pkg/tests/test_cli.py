"""Subcommand plumbing: flags, config files, overrides, outputs, exit codes.

Exit convention: 0 success/Pass, 1 Fail or numeric failure, 2 usage error.
"""

import csv
import json
import os

import numpy as np
import pytest

import yamabelab as yl
from yamabelab.cli import run

SOLVE_FLAGS = ["--n", "3", "--m", "0.2", "--beta", "1", "--rho", "1", "--eta", "1"]


@pytest.fixture(autouse=True)
def _workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("YAMABELAB_OUTPUT_DIR", raising=False)
    return tmp_path


def test_solve_writes_profile(tmp_path, capsys):
    code = run(["solve", *SOLVE_FLAGS, "--r-max", "10"])
    assert code == 0
    out = capsys.readouterr().out
    assert "Global" in out
    with open(tmp_path / "profile.csv") as fh:
        assert fh.readline().strip() == "r,v,dv"
    doc = json.loads((tmp_path / "profile.json").read_text())
    assert doc["status"]["kind"] == "Global"
    assert doc["params"]["rho"] == 1.0


def test_solve_blowup_reports_radius(tmp_path, capsys):
    code = run(
        ["solve", "--n", "3", "--m", "0.2", "--alpha", "-1", "--beta", "-1",
         "--eta", "1", "--r-max", "10"]
    )
    assert code == 0
    assert "BlowUp" in capsys.readouterr().out
    doc = json.loads((tmp_path / "profile.json").read_text())
    assert doc["status"]["kind"] == "BlowUp"
    assert doc["status"]["radius"] < 3.873


def test_formats_subset(tmp_path):
    code = run(["solve", *SOLVE_FLAGS, "--r-max", "10", "--formats", "json"])
    assert code == 0
    assert not (tmp_path / "profile.csv").exists()
    assert (tmp_path / "profile.json").exists()
    assert run(["solve", *SOLVE_FLAGS, "--r-max", "10", "--formats", "yaml"]) == 2


def test_geometry_outputs(tmp_path, capsys):
    code = run(["geometry", *SOLVE_FLAGS, "--r-max", "10"])
    assert code == 0
    assert "cross-check" in capsys.readouterr().out
    with open(tmp_path / "geometry.csv") as fh:
        assert fh.readline().strip() == "r,v,w,R,K0,K1,psi_s"
    doc = json.loads((tmp_path / "geometry.json").read_text())
    assert doc["k0_agreement"] < 1e-3


def test_geometry_rejects_general_exponent(capsys):
    code = run(
        ["geometry", "--n", "3", "--m", "0.15", "--beta", "1", "--alpha", "2",
         "--eta", "1", "--r-max", "10"]
    )
    assert code == 2
    assert "soliton" in capsys.readouterr().err


def test_geometry_csv_roundtrip_reproduces(tmp_path):
    assert run(["solve", *SOLVE_FLAGS, "--r-max", "100"]) == 0
    assert run(["geometry", *SOLVE_FLAGS, "--r-max", "100"]) == 0
    prof = yl.load_profile(tmp_path / "profile.csv", tmp_path / "profile.json")
    curves = yl.compute_geometry(prof)
    data = np.loadtxt(tmp_path / "geometry.csv", delimiter=",", skiprows=1)
    for col, name in ((2, "w"), (3, "R"), (4, "K0"), (5, "K1"), (6, "psi_s")):
        stored = data[:, col]
        recomputed = getattr(curves, name)
        scale = np.max(np.abs(stored))
        assert np.max(np.abs(stored - recomputed)) <= 1e-12 * scale


def test_verify_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text(
        "# expanding reference\n"
        "n = 3\n"
        "m = 0.2\n"
        "beta = 1\n"
        "rho = -1\n"
        "eta = 1\n"
    )
    code = run(["verify", "--config", str(cfg)])
    assert code == 0
    out = capsys.readouterr().out
    assert "Expanding" in out and "Pass" in out
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["overall"] == "Pass"


def test_verify_nonpass_exit_code():
    # steady run is honestly Inconclusive at r = 1e4, so verify exits 1
    code = run(
        ["verify", "--n", "3", "--m", "0.2", "--beta", "1", "--rho", "0", "--eta", "1"]
    )
    assert code == 1


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("n = 3\ngamma = 7\n")
    assert run(["verify", "--config", str(cfg)]) == 2
    assert "unknown config key 'gamma'" in capsys.readouterr().err
    cfg.write_text("n 3\n")
    assert run(["verify", "--config", str(cfg)]) == 2
    assert run(["verify", "--config", str(tmp_path / "missing.toml")]) == 2


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text("n = 3\nm = 0.2\nbeta = -1\nalpha = -4\neta = 1\n")
    # config alone certifies the faster Case1 blow-up; the flag moves alpha
    assert run(["certify-blowup", "--config", str(cfg)]) == 0
    assert "Case1" in capsys.readouterr().out
    assert run(["certify-blowup", "--config", str(cfg), "--alpha", "-1"]) == 0
    assert "Case2" in capsys.readouterr().out


def test_env_var_overrides_output_dir(tmp_path, monkeypatch):
    nested = tmp_path / "deep" / "out"
    monkeypatch.setenv("YAMABELAB_OUTPUT_DIR", str(nested))
    code = run(["solve", *SOLVE_FLAGS, "--r-max", "10",
                "--output-dir", str(tmp_path / "ignored")])
    assert code == 0
    assert (nested / "profile.csv").exists()
    assert not (tmp_path / "ignored").exists()


def test_certify_blowup_cases(capsys):
    assert run(["certify-blowup", "--n", "3", "--m", "0.2", "--alpha", "-1",
                "--beta", "-1", "--eta", "1"]) == 0
    out = capsys.readouterr().out
    assert "Case2" in out and "3.8730" in out.replace("3.87298", "3.8730")
    assert "within bound" in out

    assert run(["certify-blowup", "--n", "3", "--m", "0.2", "--alpha", "-1",
                "--beta", "0", "--eta", "1"]) == 0
    assert "no certified bound" in capsys.readouterr().out

    assert run(["certify-blowup", "--n", "3", "--m", "0.2", "--alpha", "1",
                "--beta", "1", "--eta", "1"]) == 2


def test_selfsim_forward(tmp_path, capsys):
    code = run(["selfsim", "--kind", "forward", "--n", "3", "--m", "0.2",
                "--beta", "1", "--eta", "1", "--x-max", "5", "--samples", "11",
                "--r-max", "100"])
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "selfsim.csv")))
    assert len(rows) == 11
    assert float(rows[0]["u"]) == 1.0  # v(0) = eta at t = 1
    # passing alpha or rho alongside --kind is contradictory
    assert run(["selfsim", "--kind", "forward", "--n", "3", "--m", "0.2",
                "--beta", "1", "--eta", "1", "--alpha", "5"]) == 2


def test_missing_and_malformed_parameters(capsys):
    assert run(["solve", "--n", "3", "--m", "0.2", "--beta", "1"]) == 2
    assert "eta" in capsys.readouterr().err
    # list values only make sense for sweep
    assert run(["solve", *SOLVE_FLAGS[:-2], "--eta", "1,2"]) == 2
    assert run(["solve", *SOLVE_FLAGS, "--r-max", "-5"]) == 2
    assert run(["nonsense"]) == 2


def test_sweep_grid(tmp_path, capsys):
    code = run(["sweep", "--n", "3", "--m", "0.2", "--beta", "1",
                "--rho=-1,0", "--eta", "1", "--r-max", "150"])
    rows = list(csv.DictReader(open(tmp_path / "sweep.csv")))
    assert len(rows) == 2
    variants = {row["rho"]: row["variant"] for row in rows}
    assert variants == {"-1": "Expanding", "0": "Steady"}
    assert all(row["error"] == "" for row in rows)
    # short r_max leaves verdicts unsettled; Inconclusive must not fail the sweep
    assert all(row["overall"] in {"Pass", "Inconclusive"} for row in rows)
    assert code == 0


def test_sweep_blowup_row_certified(tmp_path):
    code = run(["sweep", "--n", "3", "--m", "0.2", "--beta", "-1",
                "--alpha=-1,-4", "--eta", "1", "--r-max", "50"])
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "sweep.csv")))
    assert [row["overall"] for row in rows] == ["Certified", "Certified"]
    for row in rows:
        assert row["status"] == "BlowUp"
        assert float(row["blowup_radius"]) <= float(row["blowup_bound"]) * (1 + 1e-6)


def test_sweep_captures_per_point_errors(tmp_path):
    # rho > 0 with beta <= 0 solves into uncertified blow-up: verify raises,
    # the row records the error, the other rows are unaffected
    code = run(["sweep", "--n", "3", "--m", "0.2", "--beta=-1,1",
                "--alpha", "1.25", "--eta", "1", "--r-max", "150"])
    assert code == 1
    rows = list(csv.DictReader(open(tmp_path / "sweep.csv")))
    by_beta = {row["beta"]: row for row in rows}
    assert "RuntimeError" in by_beta["-1"]["error"]
    assert by_beta["1"]["error"] == ""


def test_sweep_requires_grid_keys():
    assert run(["sweep", "--n", "3", "--m", "0.2", "--beta", "1"]) == 2
    assert run(["sweep", "--n", "3", "--m", "0.2", "--beta", "1", "--eta", "1"]) == 2
    assert run(["sweep", "--n", "3.5,4", "--m", "0.2", "--beta", "1",
                "--eta", "1", "--rho", "1"]) == 2
