import math

import numpy as np
import pytest
from scipy.linalg import expm

from slowlight.errors import RefinementRequired
from slowlight.model import GridSpec, MediumParams, PulsePair, boundary_envelopes
from slowlight.solver import (SolverOptions, depth_schedule, integrate_atoms_at_z, polarization,
                              solve, step_fields, step_fields_rk4, substeps)

SMALL = PulsePair(2.0, 8.0, R=2.0, x0=6.0)
SMALL_MEDIUM = MediumParams(20.0, 20.0, z_m=1.0)
SMALL_GRID = GridSpec(-5.0, 11.0, 161, 11)
FAST = SolverOptions(lambda_dx=0.1, dz_max=0.01)


@pytest.fixture(scope="module")
def small_run():
    return solve(SMALL, SMALL_MEDIUM, SMALL_GRID, FAST)


def test_no_probe_no_dynamics():
    n = 2001
    x = np.linspace(-6, 6, n)
    wc = 20 * np.exp(-0.2 * x**2)
    a1, a2, a3 = integrate_atoms_at_z(np.zeros(n), wc, MediumParams(1.0, 1.0), x[1] - x[0])
    assert np.max(abs(a2)) < 1e-12 and np.max(abs(a3)) < 1e-12
    assert np.allclose(abs(a1), 1.0, atol=1e-12)


@pytest.mark.parametrize("interp", ["linear", "cubic"])
def test_constant_fields_match_matrix_exponential(interp):
    wp, wc, length, n = 3.0, 4.0, 2.0, 4001
    medium = MediumParams(1.0, 1.0, delta=0.7, gamma2=0.3)
    a = integrate_atoms_at_z(np.full(n, wp), np.full(n, wc), medium, length / (n - 1), interp)
    d = complex(0.7, 0.15)
    gen = 1j * np.array([[0, wp, 0], [wp, d, wc], [0, wc, 0]], dtype=complex)
    exact = expm(gen * length) @ np.array([1, 0, 0], dtype=complex)
    for i in range(3):
        assert abs(a[i][-1] - exact[i]) < 1e-8


def test_reference_pulses_at_entrance():
    x = np.linspace(-6, 6, 20001)
    wp, wc = boundary_envelopes(PulsePair(5.0, 20.0), x)
    a1, a2, a3 = integrate_atoms_at_z(wp, wc, MediumParams(200.0, 200.0), x[1] - x[0])
    assert np.max(abs(a2)) < 0.05
    # the probe switches off first, so A3 peaks at the pulse centre and returns to zero
    assert np.max(abs(a3)) == pytest.approx(1 / math.sqrt(17), rel=0.02)
    assert abs(a3[-1]) < 1e-3


def test_stiffness_guard():
    x = np.linspace(0, 1, 11)
    with pytest.raises(RefinementRequired) as info:
        integrate_atoms_at_z(np.full(11, 30.0), np.full(11, 40.0), MediumParams(1, 1), x[1])
    assert info.value.lambda_max == pytest.approx(50.0)
    assert info.value.suggested_refine == 16


def test_zero_excited_amplitude_leaves_fields_unchanged():
    n = 101
    amps = (np.ones(n, complex), np.zeros(n, complex), np.zeros(n, complex))
    sp, sc = polarization(*amps, SMALL_MEDIUM)
    assert not sp.any() and not sc.any()


def _one_field_step(step, dz, count):
    x = np.linspace(-5, 5, 2001)
    dx = x[1] - x[0]
    medium = MediumParams(5.0, 5.0)
    fields = boundary_envelopes(PulsePair(2.0, 8.0), x)
    amps = integrate_atoms_at_z(*fields, medium, dx)
    for _ in range(count):
        fields, amps = step(amps, fields, medium, dz / count, dx)
    return fields[0]


@pytest.mark.parametrize("step,order,dz", [(step_fields, 2, 0.025), (step_fields_rk4, 4, 0.05)])
def test_richardson_ratio(step, order, dz):
    e1 = _one_field_step(step, dz, 1) - _one_field_step(step, dz, 2)
    e2 = _one_field_step(step, dz, 2) - _one_field_step(step, dz, 4)
    ratio = np.max(abs(e1)) / np.max(abs(e2))
    target = 2**order
    assert abs(ratio - target) <= 0.5 * target / 4


def test_schedule_nests_under_refinement():
    coarse = depth_schedule(161, 20, 16)
    fine = depth_schedule(161, 40, 16)
    assert fine == [2 * m for m in coarse]
    assert coarse[0] == 320 and coarse[-1] == 20


def test_substeps_follow_stiffness(small_run):
    sx, sz = substeps(SMALL, SMALL_MEDIUM, SMALL_GRID, FAST)
    lam = 8.0 * (1 + 2 * math.exp(-0.2 * 36)) + 0.1
    assert sx >= lam * SMALL_GRID.dx / 0.1 - 1
    assert sz == 10
    assert small_run.x_substeps == sx


def test_options_validation():
    with pytest.raises(ValueError):
        SolverOptions(refine=3)
    with pytest.raises(ValueError):
        SolverOptions(interp="spline")
    with pytest.raises(ValueError):
        SolverOptions(z_scheme="euler")


def test_small_run_conserves(small_run):
    assert small_run.norm_max_dev < 1e-9
    assert small_run.flux_residual < 1e-4
    assert np.allclose(small_run.fields.w_p[0], boundary_envelopes(SMALL, SMALL_GRID.x)[0])


def test_probe_depletes_coupling_survives(small_run):
    wp, wc = small_run.fields.w_p, small_run.fields.w_c
    x = small_run.fields.x
    centre = np.argmin(abs(x))
    assert abs(wp[-1, centre]) < 0.97 * abs(wp[0, centre])
    assert np.all(np.diff(abs(wp[1:, centre])) < 0)
    assert abs(wc[-1, centre]) == pytest.approx(abs(wc[0, centre]), rel=0.02)


def test_zero_probe_is_invariant():
    pair = PulsePair(0.0, 8.0, R=2.0, x0=6.0)
    run = solve(pair, SMALL_MEDIUM, SMALL_GRID, FAST)
    assert not run.fields.w_p.any()
    assert np.array_equal(run.fields.w_c, np.broadcast_to(run.fields.w_c[0], run.fields.w_c.shape))


def test_deterministic(small_run):
    again = solve(SMALL, SMALL_MEDIUM, SMALL_GRID, FAST)
    assert np.array_equal(again.fields.w_p, small_run.fields.w_p)
    assert np.array_equal(again.amps.a3, small_run.amps.a3)


def test_time_translation_covariance():
    shift = 0.5
    opts = SolverOptions(lambda_dx=0.1, dz_max=0.01, x_substeps=17)
    base = solve(SMALL, SMALL_MEDIUM, SMALL_GRID, opts)
    moved_grid = GridSpec(SMALL_GRID.x_min + shift, SMALL_GRID.x_max + shift, SMALL_GRID.n_x, SMALL_GRID.n_z)
    moved = solve(SMALL.shifted(shift), SMALL_MEDIUM, moved_grid, opts)
    assert np.max(abs(moved.fields.w_p - base.fields.w_p)) < 1e-4
    assert np.max(abs(moved.amps.a3 - base.amps.a3)) < 1e-4


def test_heun_and_rk4_agree(small_run):
    heun = solve(SMALL, SMALL_MEDIUM, SMALL_GRID, SolverOptions(lambda_dx=0.1, dz_max=0.01, z_scheme="heun"))
    assert np.max(abs(heun.fields.w_p - small_run.fields.w_p)) < 1e-3


def test_summary_keys(small_run):
    s = small_run.summary()
    assert {"norm_max_dev", "flux_max_dev", "flux_residual", "exit_peak_wp", "exit_peak_x"} <= set(s)
