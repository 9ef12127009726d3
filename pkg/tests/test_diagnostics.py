import dataclasses

import numpy as np
import pytest

from slowlight.diagnostics import (compare, detuning_independence, finite, max_rel_change,
                                   max_rel_err, refinement_study, write_table_csv)
from slowlight.errors import ConfigError
from slowlight.model import GridSpec, MediumParams, PulsePair
from slowlight.solver import SolverOptions, solve

PAIR = PulsePair(2.0, 8.0, R=2.0, x0=6.0)
MEDIUM = MediumParams(20.0, 20.0, z_m=1.0)
GRID = GridSpec(-5.0, 11.0, 161, 11)
FAST = SolverOptions(lambda_dx=0.1, dz_max=0.01)


@pytest.fixture(scope="module")
def run():
    return solve(PAIR, MEDIUM, GRID, FAST)


def test_self_comparison_is_zero(run):
    rep = compare(run, run)
    assert rep.max_rel_err_wp == 0
    assert rep.peak_amp_err == 0 and rep.peak_time_err == 0
    assert rep.a3_plateau_err == 0
    assert finite(rep)


def test_lattice_mismatch_is_a_config_error(run):
    other = solve(PAIR, MEDIUM, GridSpec(-5.0, 11.0, 81, 11), FAST)
    with pytest.raises(ConfigError):
        compare(run, other)


def test_max_rel_err_is_symmetric():
    rng = np.random.default_rng(3)
    u = rng.normal(size=(7, 40)) + 1j * rng.normal(size=(7, 40))
    w = u + 0.1 * rng.normal(size=u.shape)
    assert max_rel_err(u, w) == max_rel_err(w, u)
    assert max_rel_err(u, u) == 0


def test_mask_ignores_low_wings():
    u = np.array([1.0, 1e-4])
    w = np.array([1.0, 2e-4])
    assert max_rel_err(u, w, mask_frac=0.05) == 0
    assert max_rel_err(u, w, mask_frac=0.0) == pytest.approx(0.5)


def test_negligible_coupling_leaves_fields_unchanged_under_refinement():
    # coupling must stay positive; 1e-300 makes every field increment round away
    medium = MediumParams(1e-300, 1e-300, z_m=1.0)
    rows = refinement_study(PAIR, medium, GRID, factors=(2, 4), options=FAST)
    for row in rows:
        assert row["w_p"] == 0 and row["w_c"] == 0


def test_refinement_factors_are_restricted():
    with pytest.raises(ConfigError):
        refinement_study(PAIR, MEDIUM, GRID, factors=(3,), options=FAST)


def test_decay_worsens_agreement():
    from slowlight.adiabatic import solve_adiabatic

    pair = PulsePair(5.0, 20.0, R=4.0, x0=11.0)
    medium = MediumParams(200.0, 200.0, z_m=1.0)
    grid = GridSpec(-6.0, 17.0, 231, 11)
    ana = solve_adiabatic(pair, medium, grid)
    clean = compare(ana, solve(pair, medium, grid, FAST))
    decayed = compare(ana, solve(pair, dataclasses.replace(medium, gamma2=1.0), grid, FAST))
    assert decayed.max_rel_err_wp > clean.max_rel_err_wp > 0
    assert decayed.peak_amp_err > clean.peak_amp_err


def test_resonant_against_itself_is_zero():
    rows = detuning_independence(PAIR, MEDIUM, [0.0], GRID, FAST)
    assert rows[0]["distance"] == 0
    assert rows[0]["warning"] is None


def test_violated_far_detuning_gets_a_warning():
    rows = detuning_independence(PAIR, MEDIUM, [200.0], GRID, FAST)
    assert rows[0]["warning"] is not None
    assert rows[0]["distance"] > 0


def test_max_rel_change_reports_each_quantity(run):
    out = max_rel_change(run, run)
    assert set(out) == {"w_p", "w_c", "a1", "a2", "a3", "max"}
    assert out["max"] == 0


def test_table_csv(tmp_path):
    path = write_table_csv([{"factor": 2, "max": 1.5e-6}], tmp_path / "t.csv")
    assert path.read_text().splitlines() == ["factor,max", "2,1.5e-06"]
