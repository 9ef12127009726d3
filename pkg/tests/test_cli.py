import json
from pathlib import Path

import pytest

from slowlight import cli

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def small_config(tmp_path, **extra):
    cfg = {"name": "small", "omega_p0": 2.0, "omega_c0": 8.0, "kappa12": 20.0, "kappa32": 20.0,
           "R": 2.0, "x0": 6.0, "z_m": 1.0, "x_min": -5.0, "x_max": 11.0, "n_x": 161, "n_z": 11,
           "solver": {"lambda_dx": 0.1, "dz_max": 0.01}}
    cfg.update(extra)
    path = tmp_path / "small.json"
    path.write_text(json.dumps(cfg))
    return path


def test_predict_reference_case(capsys):
    code, out, _ = run(capsys, "predict", CONFIGS / "fig02.json")
    assert code == 0
    data = json.loads(out)
    assert data["alpha"] == pytest.approx(2.8545986, abs=1e-6)
    assert data["t_r1"] == pytest.approx(-2.19, abs=0.01)  # offsets from t_d


def test_matched_r_flag(capsys):
    code, out, _ = run(capsys, "predict", CONFIGS / "fig04.json", "--matched-r")
    assert code == 0
    assert json.loads(out)["matched_R"] == pytest.approx(2.923, abs=1e-3)


def test_escape_reports_minimum_ratio(tmp_path, capsys):
    cfg = json.loads((CONFIGS / "fig02.json").read_text())
    cfg["R"] = 1.0
    path = tmp_path / "r1.json"
    path.write_text(json.dumps(cfg))
    code, _, err = run(capsys, "predict", path)
    assert code == 2
    assert "minimum R" in err


def test_missing_config(tmp_path, capsys):
    code, _, err = run(capsys, "predict", tmp_path / "nope.json")
    assert code == 2
    assert "not found" in err


def test_unknown_key(tmp_path, capsys):
    code, _, err = run(capsys, "simulate", small_config(tmp_path, colour="blue"))
    assert code == 2
    assert "colour" in err


def test_bad_solver_options(tmp_path, capsys):
    code, _, _ = run(capsys, "simulate", small_config(tmp_path, solver={"warp": 9}), "--no-figures")
    assert code == 2


def test_simulate_adiabatic_writes_outputs(tmp_path, capsys):
    out = tmp_path / "out"
    code, stdout, _ = run(capsys, "simulate", CONFIGS / "fig02.json", "--engine", "adiabatic",
                          "--out", out)
    assert code == 0
    names = {p.name for p in out.iterdir()}
    for expected in ("fig02_tables.csv", "fig02_adiabatic.csv", "fig02_summary.json",
                     "fig02_manifest.json", "fig02_maps_adiabatic.png", "fig02_exit.png",
                     "fig02_coherence.png"):
        assert expected in names
    summary = json.loads((out / "fig02_summary.json").read_text())
    assert summary["adiabatic"]["mode"] == "Case1_EqualKappa"
    assert (out / "fig02_exit.png").read_bytes()[:4] == b"\x89PNG"


def test_simulate_both_then_compare(tmp_path, capsys):
    out = tmp_path / "out"
    code, _, _ = run(capsys, "simulate", small_config(tmp_path), "--out", out)
    assert code == 0
    manifest = json.loads((out / "small_manifest.json").read_text())
    assert manifest["engine"] == "both"
    assert manifest["options"]["lambda_dx"] == 0.1
    comparison = json.loads((out / "small_comparison.json").read_text())
    assert comparison["norm_residual"] < 1e-7

    code, stdout, _ = run(capsys, "compare", out / "small_numeric.csv", out / "small_numeric.csv")
    assert code == 0
    assert json.loads(stdout)["max_rel_err_wp"] == 0


def test_output_directory_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SLOWLIGHT_OUT", str(tmp_path / "env"))
    code, _, _ = run(capsys, "simulate", small_config(tmp_path), "--engine", "adiabatic",
                     "--no-figures")
    assert code == 0
    assert (tmp_path / "env" / "small_summary.json").exists()


def test_verify_oracles(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "oracles")
    assert code == 0
    assert out.count("[PASS]") >= 4
    assert "[FAIL]" not in out


def test_verify_reference_values_reports_failures(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "reference-values")
    assert code == 1
    assert "[FAIL] C1" in out
