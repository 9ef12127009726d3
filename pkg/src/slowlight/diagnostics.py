"""Error metrics between solutions, refinement studies and the detuning sweep."""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .model import GridSpec, MediumParams, PulsePair, validate_config
from .solver import SolverOptions, solve

DEFAULT_MASK = 0.05
REFINE_THRESHOLD = 1e-3


@dataclass(frozen=True)
class ComparisonReport:
    max_rel_err_wp: float
    peak_amp_err: float
    peak_time_err: float
    a3_plateau_err: float
    flux_residual: float
    norm_residual: float

    def to_dict(self) -> dict:
        return asdict(self)


def _same_lattice(a, b):
    fa, fb = a.fields, b.fields
    if fa.w_p.shape != fb.w_p.shape:
        raise ConfigError(f"lattice mismatch: {fa.w_p.shape} vs {fb.w_p.shape}")
    if not (np.allclose(fa.x, fb.x, rtol=0, atol=1e-12) and np.allclose(fa.z, fb.z, rtol=0, atol=1e-12)):
        raise ConfigError("lattice mismatch: sample points differ")


def max_rel_err(u, w, mask_frac=DEFAULT_MASK) -> float:
    """Largest ``|u - w| / max(|u|, |w|)`` over points above ``mask_frac`` of the joint peak."""
    mag = np.maximum(abs(u), abs(w))
    peak = float(mag.max()) if mag.size else 0.0
    if peak == 0:
        return 0.0
    on = mag > mask_frac * peak
    return float(np.max(abs(u - w)[on] / mag[on]))


def _exit_peak(sol):
    row = abs(sol.fields.w_p[-1])
    j = int(np.argmax(row))
    return float(row[j]), float(sol.fields.x[j])


def compare(a, b, mask_frac: float = DEFAULT_MASK,
            plateau: tuple[float, float] | None = None) -> ComparisonReport:
    """Compare two solutions (anything with ``fields`` and ``amps`` grids).

    ``plateau`` restricts the coherence comparison to a time window, usually
    the dead window between the first pulses and the recurrence.  Residuals
    are taken from whichever side is a numerical solve.
    """
    _same_lattice(a, b)
    pa, ta = _exit_peak(a)
    pb, tb = _exit_peak(b)
    x = a.fields.x
    cols = slice(None) if plateau is None else (x >= plateau[0]) & (x <= plateau[1])
    a3_err = float(np.max(abs(abs(a.amps.a3[:, cols]) - abs(b.amps.a3[:, cols])), initial=0.0))

    def worst(attr):
        return max(getattr(a, attr, 0.0), getattr(b, attr, 0.0))

    return ComparisonReport(
        max_rel_err_wp=max_rel_err(a.fields.w_p, b.fields.w_p, mask_frac),
        peak_amp_err=abs(pa - pb),
        peak_time_err=abs(ta - tb),
        a3_plateau_err=a3_err,
        flux_residual=worst("flux_residual"),
        norm_residual=worst("norm_max_dev"),
    )


def max_rel_change(coarse, fine, threshold=REFINE_THRESHOLD) -> dict:
    """Per-quantity max relative change at points above ``threshold`` of that quantity's peak."""
    out = {}
    pairs = {
        "w_p": (coarse.fields.w_p, fine.fields.w_p),
        "w_c": (coarse.fields.w_c, fine.fields.w_c),
        "a1": (coarse.amps.a1, fine.amps.a1),
        "a2": (coarse.amps.a2, fine.amps.a2),
        "a3": (coarse.amps.a3, fine.amps.a3),
    }
    for name, (u, w) in pairs.items():
        mag = abs(w)
        peak = float(mag.max())
        on = mag > threshold * peak
        out[name] = float(np.max(abs(u - w)[on] / mag[on])) if peak > 0 else 0.0
    out["max"] = max(out.values())
    return out


def refinement_study(pair: PulsePair, medium: MediumParams, grid: GridSpec,
                     factors=(2,), options: SolverOptions | None = None,
                     base=None) -> list[dict]:
    """Solve at ``refine=1`` and at each factor; report the changes on the shared output lattice.

    ``base`` reuses an existing refine-1 result.
    """
    options = options or SolverOptions()
    if any(f not in (2, 4) for f in factors):
        raise ConfigError("refinement factors must be 2 or 4")
    if base is None:
        base = solve(pair, medium, grid, dataclasses.replace(options, refine=1))
    rows = []
    for f in factors:
        fine = solve(pair, medium, grid, dataclasses.replace(options, refine=f))
        rows.append({"factor": f, **max_rel_change(base, fine)})
    return rows


def write_table_csv(rows: list[dict], path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (f"{v:.9g}" if isinstance(v, float) else v) for k, v in row.items()})
    return path


def detuning_independence(pair: PulsePair, medium_base: MediumParams, deltas,
                          grid: GridSpec, options: SolverOptions | None = None) -> list[dict]:
    """Probe-grid distance of each detuned run from the resonant one, as a fraction of its peak."""
    ref = solve(pair, dataclasses.replace(medium_base, delta=0.0), grid, options)
    peak = float(abs(ref.fields.w_p).max())
    rows = []
    for delta in deltas:
        medium = dataclasses.replace(medium_base, delta=float(delta))
        check = validate_config(pair, medium)["far_detuned"]
        warning = None
        if check.applicable and not check.passed:
            warning = (f"|Omega_c0|^2/delta = {check.ratio:.3g} is not >> 1; "
                       "the adiabatic condition is violated")
        run = ref if delta == 0 else solve(pair, medium, grid, options)
        dist = float(abs(run.fields.w_p - ref.fields.w_p).max()) / peak if peak else 0.0
        rows.append({"delta": float(delta), "distance": dist, "peak": peak,
                     "exit_peak": run.exit_peak()[0], "warning": warning})
    return rows


def finite(report: ComparisonReport) -> bool:
    return all(math.isfinite(v) and v >= 0 for v in asdict(report).values())
