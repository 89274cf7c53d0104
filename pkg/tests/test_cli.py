import json
import math
import shutil
import subprocess

import pytest

from tmfrac.cli import main


def _run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def test_constants(tmp_path):
    code, out = _run(tmp_path, "constants")
    assert code == 0
    data = json.loads((out / "result.json").read_text())
    assert data["mu"] == pytest.approx(4.0, rel=1e-14)
    assert data["omega_theta"] == pytest.approx(2.0, rel=1e-14)
    assert data["ball_volume"] == pytest.approx(1.0, rel=1e-14)
    assert data["lambda"] == pytest.approx(5.783186, rel=3e-3)
    assert list(data) == sorted(data)


def test_verify_report(tmp_path):
    code, out = _run(tmp_path, "verify")
    assert code == 0
    report = (out / "report.txt").read_text()
    assert "psi_normalization: PASS" in report
    assert "upper_bound: 3.71828182845905" in report
    assert "FAIL" not in report


def test_verify_flags_inadmissible_nu(tmp_path):
    code, out = _run(tmp_path, "verify", "--nu", "10")
    assert code == 1
    assert "nu_admissible: FAIL" in (out / "report.txt").read_text()


@pytest.mark.parametrize(
    "args, files",
    [
        (["eigen", "--n", "256"], ["result.json", "profile.csv"]),
        (["maximize", "--eps", "2", "--n", "256"], ["result.json", "profile.csv"]),
        (["sweep", "--eps-list", "2", "1", "--n", "256", "--kind", "log", "--decades", "6"], ["result.json", "sweep.csv"]),
        (["sweep", "--eps", "2", "--nu-list", "0", "1", "--n", "256"], ["result.json", "sweep.csv"]),
        (["profile", "--p", "3", "--theta", "2"], ["result.json", "profile.csv"]),
        (["green", "--nu-frac", "0.5"], ["result.json", "profile.csv"]),
        (["testfn", "--eps-list", "0.2", "1e-3", "1e-5"], ["result.json", "table.csv"]),
    ],
)
def test_commands_write_artifacts(tmp_path, args, files):
    code, out = _run(tmp_path, *args)
    assert code == 0
    for f in files:
        assert (out / f).stat().st_size > 0


def test_maximize_payload(tmp_path):
    code, out = _run(tmp_path, "maximize", "--eps", "2", "--n", "256")
    data = json.loads((out / "result.json").read_text())
    assert abs(data["h_nu"] - 1) <= 1e-8
    assert data["S_eps"] >= 1.0
    assert data["converged"] is True


def test_testfn_reports_rejected(tmp_path):
    code, out = _run(tmp_path, "testfn", "--eps-list", "0.2", "1e-3")
    data = json.loads((out / "result.json").read_text())
    assert [r["eps"] for r in data["rejected"]] == [0.2]
    assert data["upper_bound"] == pytest.approx(1 + math.e, abs=1e-9)


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"command": "eigen", "params": {"R": 2.0}, "grid": {"n": 128}}))
    code, out = _run(tmp_path, "eigen", "--config", str(cfg), "--R", "0.5")
    assert code == 0
    data = json.loads((out / "result.json").read_text())
    assert data["params"]["R"] == 0.5


@pytest.mark.parametrize(
    "doc",
    [
        {"params": {"p": 2.0, "colour": 1}},
        {"grid": {"n": 100.5}},
        {"solver": {"damping": 0.0}},
        {"sweep": {"eps_list": [1.0, 2.0]}},
        {"command": "green"},
        {"params": {"nu": 1.0, "nu_frac": 0.5}},
    ],
)
def test_bad_config_exits_2(tmp_path, doc):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps(doc))
    code, _ = _run(tmp_path, "eigen", "--config", str(cfg))
    assert code == 2


def test_invalid_inputs_exit_2(tmp_path):
    assert _run(tmp_path, "bogus")[0] == 2
    assert _run(tmp_path, "maximize")[0] == 2  # missing eps
    assert _run(tmp_path, "eigen", "--p", "1.5")[0] == 2
    with pytest.raises(SystemExit) as info:
        main(["eigen", "--n", "many"])
    assert info.value.code == 2


def test_nonconvergence_exits_3(tmp_path):
    assert _run(tmp_path, "maximize", "--eps", "2", "--n", "256", "--max-iter", "1")[0] == 3


def test_deterministic_outputs(tmp_path):
    args = ["sweep", "--eps-list", "2", "1", "--n", "256", "--kind", "log", "--decades", "6"]
    _, a = _run(tmp_path, *args, name="a")
    _, b = _run(tmp_path, *args, name="b")
    for f in ("result.json", "sweep.csv"):
        assert (a / f).read_bytes() == (b / f).read_bytes()


@pytest.mark.skipif(shutil.which("tmfrac") is None, reason="console script not installed")
def test_console_script(tmp_path):
    proc = subprocess.run(["tmfrac", "constants", "--out", str(tmp_path)], capture_output=True)
    assert proc.returncode == 0
    proc = subprocess.run(["tmfrac", "bogus", "--out", str(tmp_path)], capture_output=True)
    assert proc.returncode == 2
