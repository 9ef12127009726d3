"""The acceptance checks, shared by ``slowlight verify`` and the test suite.

Each criterion returns a list of ``Outcome`` rows.  Numerical runs are cached
per process so criteria that look at the same solve do not repeat it.
"""

from __future__ import annotations

import dataclasses
import functools
import math
import time
from dataclasses import dataclass

import numpy as np

from . import adiabatic, bloch, revival
from .diagnostics import compare, detuning_independence, max_rel_change
from .model import GridSpec, MediumParams, PulsePair, boundary_derivatives, boundary_envelopes
from .solver import SolverOptions, integrate_atoms_at_z, solve


@dataclass(frozen=True)
class Outcome:
    criterion: int
    name: str
    measured: float
    expected: float | None
    tol: float | None
    passed: bool
    kind: str = "abs"  # "abs": |m - e| <= tol; "max": m <= tol; "min": m > tol

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        if self.kind == "abs":
            target = f"expected {self.expected:.10g} +/- {self.tol:.3g}"
        elif self.kind == "max":
            target = f"limit <= {self.tol:.3g}"
        else:
            target = f"must exceed {self.tol:.3g}"
        return f"[{mark}] C{self.criterion} {self.name}: measured {self.measured:.10g}, {target}"


def near(criterion, name, measured, expected, tol) -> Outcome:
    return Outcome(criterion, name, float(measured), float(expected), float(tol),
                   bool(abs(measured - expected) <= tol))


def at_most(criterion, name, measured, limit) -> Outcome:
    return Outcome(criterion, name, float(measured), None, float(limit),
                   bool(measured <= limit), kind="max")


def above(criterion, name, measured, limit) -> Outcome:
    return Outcome(criterion, name, float(measured), None, float(limit),
                   bool(measured > limit), kind="min")


# the worked example: weak probe, equal couplings, recurrence R = 4 at t_d = 11
WEAK = (PulsePair(5.0, 20.0, R=4.0, x0=11.0), MediumParams(200.0, 200.0, z_m=8.0))
# equal pulses, kappa = 700, recurrence at the matched ratio quoted to four digits
EQUAL = (PulsePair(20.0, 20.0, R=2.923, x0=11.0), MediumParams(700.0, 700.0, z_m=8.0))
# far-detuned comparison pair
DETUNED = (PulsePair(10.0, 40.0, R=4.0, x0=10.0), MediumParams(200.0, 200.0, z_m=8.0))
DETUNING = 120.0

CASES = {"weak": WEAK, "equal": EQUAL, "detuned": DETUNED}
N_X, N_Z = 1024, 161

# options for the 5% comparisons of the detuned pair: the bright eigenvalue
# there is ~230, so the tighter default lattice would cost ~10x more
DETUNED_OPTIONS = SolverOptions(lambda_dx=0.1)
# a lattice too coarse to be converged; used to prove the harness can fail
COARSE_OPTIONS = SolverOptions(lambda_dx=0.4, dz_max=0.01, entrance_grading=1)


def case_grid(name: str) -> GridSpec:
    pair, _ = CASES[name]
    return GridSpec(-6.0, pair.x0 + 6.0, N_X, N_Z)


@functools.lru_cache(maxsize=None)
def numeric(name: str, refine: int = 1, coarse: bool = False, delta: float = 0.0):
    pair, medium = CASES[name]
    medium = dataclasses.replace(medium, delta=delta)
    if coarse:
        options = COARSE_OPTIONS
    elif name == "detuned":
        options = DETUNED_OPTIONS
    else:
        options = SolverOptions()
    return solve(pair, medium, case_grid(name), dataclasses.replace(options, refine=refine))


@functools.lru_cache(maxsize=None)
def analytic(name: str):
    pair, medium = CASES[name]
    return adiabatic.solve_adiabatic(pair, medium, case_grid(name))


def criterion_1() -> list[Outcome]:
    pair, medium = WEAK
    start = time.perf_counter()
    alpha, beta = revival.coefficients(pair, medium)
    t1, tm, t2 = revival.revival_times(pair, medium)
    peak = revival.revival_peak(pair, tm)
    elapsed = time.perf_counter() - start
    r2 = pair.R**2
    return [
        near(1, "alpha", alpha, 2.854598, 5e-7),
        near(1, "alpha/R^2", alpha / r2, 0.1784124, 5e-8),
        near(1, "beta", beta, 2.0559017, 5e-8),
        near(1, "beta/R^2", beta / r2, 0.128494, 5e-7),
        near(1, "t_r1 - t_d", t1, -2.19, 5e-3),
        near(1, "t_rm - t_d", tm, -1.767, 5e-4),
        near(1, "t_r2 - t_d", t2, -1.50, 5e-3),
        near(1, "revival peak", peak, 10.39, 5e-3),
        at_most(1, "runtime (s)", elapsed, 1.0),
    ]


def criterion_2() -> list[Outcome]:
    pair = PulsePair(20.0, 20.0)
    medium = MediumParams(700.0, 700.0, z_m=8.0)
    return [near(2, "matched R", revival.matched_R(pair, medium), 2.923, 1e-3)]


def coherence_outcomes(criterion, label, pair, medium, a3_expected, depth_expected):
    grid = GridSpec(-6.0, pair.x0 + 6.0, N_X, N_Z)
    tables = adiabatic.tabulate_profiles(pair, grid, medium)
    peak = adiabatic.coherence_peak(tables)[1]
    wp, wc = boundary_envelopes(pair, 0.0)
    dark = abs(bloch.dark_state(complex(wp), complex(wc)).a3)
    return [
        near(criterion, f"{label} |A3| at the pulse centre", dark, a3_expected, 5e-7),
        near(criterion, f"{label} tabulated |A3| maximum", peak, a3_expected, 5e-7),
        near(criterion, f"{label} coherence-maximum depth (cm)",
             adiabatic.coherence_peak_depth(tables), depth_expected, 0.01),
    ]


def criterion_3() -> list[Outcome]:
    weak = (PulsePair(5.0, 20.0), MediumParams(200.0, 200.0, z_m=8.0))
    equal = (PulsePair(20.0, 20.0), MediumParams(700.0, 700.0, z_m=8.0))
    return (coherence_outcomes(3, "(5,20) kappa=200", *weak, 1 / math.sqrt(17), 2.86)
            + coherence_outcomes(3, "(20,20) kappa=700", *equal, 1 / math.sqrt(2), 1.159))


def criterion_4() -> list[Outcome]:
    out = []
    for name in ("weak", "equal"):
        run = numeric(name)
        out.append(at_most(4, f"{name}: norm deviation", run.norm_max_dev, 1e-7))
        out.append(at_most(4, f"{name}: flux-law residual", run.flux_residual, 1e-6))
    return out


def criterion_5() -> list[Outcome]:
    fine = max_rel_change(numeric("weak"), numeric("weak", refine=2))
    control = max_rel_change(numeric("weak", coarse=True), numeric("weak", refine=2, coarse=True))
    return [at_most(5, f"default lattice, change in {k}", v, 1e-5) for k, v in fine.items() if k != "max"] + [
        above(5, "coarse control lattice, largest change", control["max"], 1e-5)]


def dead_window_peak(sol, pair) -> float:
    """Largest |w_p| at the exit between t_r/tau = 2 and t_d/tau - 3."""
    x = sol.fields.x
    on = (x >= 2.0) & (x <= pair.x0 - 3.0)
    return float(abs(sol.fields.w_p[-1, on]).max())


def criterion_6() -> list[Outcome]:
    out = []
    for name in ("weak", "equal"):
        pair, _ = CASES[name]
        num, ana = numeric(name), analytic(name)
        p_num = num.exit_peak()[0]
        p_ana = ana.exit_peak()[0]
        out.append(at_most(6, f"{name}: adiabatic vs numeric exit peak (relative)",
                           abs(p_ana - p_num) / p_num, 0.05))
        out.append(at_most(6, f"{name}: dead-window exit probe / Omega_p0",
                           dead_window_peak(num, pair) / pair.omega_p0, 1e-3))
    pair, _ = WEAK
    peak, t_peak = numeric("weak").exit_peak()
    out.append(near(6, "weak: numeric exit peak", peak, 10.44, 0.05 * 10.44))
    out.append(near(6, "weak: numeric peak time - t_d", t_peak - pair.x0, -1.74, 0.1))
    return out


def criterion_7() -> list[Outcome]:
    pair, medium = DETUNED
    rows = detuning_independence(pair, medium, [DETUNING], case_grid("detuned"), DETUNED_OPTIONS)
    return [at_most(7, f"delta={DETUNING:g} vs 0: max |w_p difference| / peak", rows[0]["distance"], 0.05)]


def criterion_8() -> list[Outcome]:
    # constant fields: compare against the eigen-decomposition of the 3x3 generator
    wp, wc, length = 3.0, 4.0, 2.0
    n = 4001
    medium = MediumParams(1.0, 1.0)
    a = integrate_atoms_at_z(np.full(n, wp, complex), np.full(n, wc, complex), medium, length / (n - 1))
    h = np.array([[0, wp, 0], [wp, 0, wc], [0, wc, 0]], dtype=complex)
    vals, vecs = np.linalg.eigh(h)
    exact = vecs @ (np.exp(1j * vals * length) * (vecs.conj().T @ np.array([1, 0, 0], complex)))
    rabi_err = float(max(abs(a[i][-1] - exact[i]) for i in range(3)))

    # first-order A2 against a central difference of the dark state
    pair = PulsePair(5.0, 20.0)
    worst = 0.0
    for x in (-1.3, -0.4, 0.25, 0.9, 1.7):
        fp, fc = (complex(v) for v in boundary_envelopes(pair, x))
        dp, dc = (complex(v) for v in boundary_derivatives(pair, x))
        step = 1e-4
        lo = bloch.dark_state(*(complex(v) for v in boundary_envelopes(pair, x - step)))
        hi = bloch.dark_state(*(complex(v) for v in boundary_envelopes(pair, x + step)))
        fd_a = -1j / fp * (hi.a1 - lo.a1) / (2 * step)
        fd_b = -1j / fc * (hi.a3 - lo.a3) / (2 * step)
        for form, ref in (("a", fd_a), ("b", fd_b)):
            got = bloch.a2_first_order(fp, fc, dp, dc, form=form)
            worst = max(worst, abs(got - ref) / abs(ref))

    roundtrip = max(abs(revival.erfinv(revival.erf(t)) - t) for t in (-2.5, -1.2345, 0.0, 0.3, 1.2345, 2.9))
    return [
        at_most(8, "constant-field Rabi vs matrix exponential", rabi_err, 1e-8),
        at_most(8, "first-order A2 vs finite difference (relative)", worst, 1e-6),
        at_most(8, "erfinv(erf(t)) roundtrip", roundtrip, 1e-9),
    ]


def criterion_9() -> list[Outcome]:
    pair, medium = WEAK
    tables = adiabatic.tabulate_profiles(pair, case_grid("weak"), medium)
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(200):
        x1, x2 = rng.uniform(-2.5, 2.5, size=2)
        z1 = rng.uniform(0.0, 8.0)
        # partner depth from the closed-form v, independent of the sampled table
        v1, v2 = adiabatic.v_closed_form(pair, [x1, x2], tables.mode)
        z2 = z1 + (v2 - v1) / tables.u_slope
        if not 0.0 <= z2 <= medium.z_m:
            continue
        w1 = _normalised(tables, z1, x1)
        w2 = _normalised(tables, z2, x2)
        worst = max(worst, float(max(abs(w1[0] - w2[0]), abs(w1[1] - w2[1]))))
    return [at_most(9, "W_p, W_c at equal v - u", worst, 1e-4)]


def _normalised(tables, z, x):
    wp, wc = adiabatic.reconstruct_fields(tables, z, x)
    n = math.sqrt(abs(wp) ** 2 + abs(wc) ** 2)
    return complex(wp) / n, complex(wc) / n


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9}

SUITES = {
    "reference-values": (1, 2, 3),
    "conservation": (4,),
    "convergence": (5,),
    "agreement": (6,),
    "detuning": (7,),
    "oracles": (8, 9),
}


def run(criteria) -> list[Outcome]:
    out = []
    for c in criteria:
        out.extend(CRITERIA[c]())
    return out
