import json

import numpy as np
import pytest

from slowlight.adiabatic import solve_adiabatic
from slowlight.model import GridSpec, MediumParams, PulsePair
from slowlight.output import CSV_HEADER, RunManifest, read_grid_csv, write_grid_csv, write_json

PAIR = PulsePair(5.0, 20.0, R=4.0, x0=11.0)
MEDIUM = MediumParams(200.0, 200.0, z_m=8.0)
GRID = GridSpec(-6.0, 17.0, 64, 9)


@pytest.fixture(scope="module")
def sol():
    return solve_adiabatic(PAIR, MEDIUM, GRID)


def test_header_and_row_count(sol, tmp_path):
    path = write_grid_csv(sol.fields, sol.amps, tmp_path / "g.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 1 + 64 * 9


def test_roundtrip(sol, tmp_path):
    path = write_grid_csv(sol.fields, sol.amps, tmp_path / "g.csv")
    back = read_grid_csv(path)
    assert np.allclose(back.fields.x, sol.fields.x)
    assert np.allclose(back.fields.z, sol.fields.z)
    assert np.allclose(back.fields.w_p, sol.fields.w_p, rtol=1e-8, atol=1e-12)
    assert np.allclose(back.amps.a3, abs(sol.amps.a3), rtol=1e-8, atol=1e-12)


def test_dumps_are_deterministic(tmp_path):
    a = solve_adiabatic(PAIR, MEDIUM, GRID)
    b = solve_adiabatic(PAIR, MEDIUM, GRID)
    pa = write_grid_csv(a.fields, a.amps, tmp_path / "a.csv")
    pb = write_grid_csv(b.fields, b.amps, tmp_path / "b.csv")
    assert pa.read_bytes() == pb.read_bytes()


def test_bad_header_is_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_grid_csv(path)


def test_json_handles_numpy(tmp_path):
    path = write_json({"v": np.float64(1.5), "n": np.int64(3)}, tmp_path / "o.json")
    assert json.loads(path.read_text()) == {"v": 1.5, "n": 3}


def test_manifest(tmp_path):
    m = RunManifest(config={"R": 4.0}, engine="adiabatic", outputs={"grid": tmp_path / "g.csv"})
    data = json.loads(m.write(tmp_path / "m.json").read_text())
    assert data["engine"] == "adiabatic"
    assert data["outputs"]["grid"].endswith("g.csv")
    assert data["versions"]["numpy"] == np.__version__
