"""Analytic adiabatic propagation.

When the atoms follow the dark state, the normalised fields are travelling
waves in the variables ``v`` (accumulated boundary intensity) and
``u = kappa12 * z``.  Two cases are closed-form:

* equal couplings (``kappa12 == kappa32``): both normalised fields travel,
  ``W = F(v - u)`` with ``v = int |w_p|^2 + |w_c|^2``;
* weak probe: the coupling is undistorted and ``w_p* / |w_c(0, x)|`` travels
  with ``v = int |w_c|^2``.

The profiles ``F_p`` (and ``F_c``) are tabulated from the entrance envelopes
over the first pulse pair and then looked up at ``v(x) - u(z)``.
"""

from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bloch import a2_first_order_profile
from .errors import ConfigError
from .model import (COUPLING_EXPONENT, PROBE_EXPONENT, AmplitudeGrid, FieldGrid, GridSpec,
                    MediumParams, PulsePair, boundary_envelopes)

WEAK_PROBE_RATIO = 0.3
# integrand below this fraction of its peak counts as a plateau of v
PLATEAU_FRAC = 1e-12
# end of the first-pulse window, relative to the recurrence delay
FIRST_WINDOW_GAP = 5.0


class Mode(str, enum.Enum):
    EQUAL_KAPPA = "Case1_EqualKappa"
    WEAK_PROBE = "Case2_WeakProbe"


def photon_flux(w_p, w_c, medium: MediumParams):
    return abs(w_p) ** 2 / medium.kappa12 + abs(w_c) ** 2 / medium.kappa32


def group_velocity(w_p, w_c, medium: MediumParams, c_tau: float | None = None):
    """Group velocity in cm per tau.

    Without ``c_tau`` (the speed of light times tau, in cm) the vacuum term is
    dropped and ``v_g = (|w_p|^2 + |w_c|^2) / kappa12``.
    """
    n2 = abs(np.asarray(w_p)) ** 2 + abs(np.asarray(w_c)) ** 2
    if c_tau is None:
        return n2 / medium.kappa12
    with np.errstate(divide="ignore"):
        return np.where(n2 > 0, 1.0 / (1.0 / c_tau + medium.kappa12 / np.where(n2 > 0, n2, 1.0)), 0.0)


def _intensity(pair: PulsePair, x, mode: Mode):
    wp, wc = boundary_envelopes(pair, x)
    if mode is Mode.WEAK_PROBE:
        return abs(wc) ** 2
    return abs(wp) ** 2 + abs(wc) ** 2


def build_v(pair: PulsePair, x, mode: Mode = Mode.EQUAL_KAPPA):
    """Cumulative trapezoid of the boundary intensity on the lattice ``x``; ``v(x[0]) = 0``."""
    x = np.asarray(x, dtype=float)
    g = _intensity(pair, x, mode)
    v = np.zeros_like(x)
    v[1:] = np.cumsum(0.5 * (g[1:] + g[:-1]) * np.diff(x))
    return v


def v_closed_form(pair: PulsePair, x, mode: Mode = Mode.EQUAL_KAPPA, cross_term: bool = True):
    """``v`` from erf integrals of the Gaussian boundary pulses, integrated from minus infinity.

    The product of the two coupling Gaussians is itself a Gaussian centred at
    ``x0 / 2``, so the cross term is closed-form too; ``cross_term=False``
    drops it.
    """
    if pair.custom is not None:
        raise ConfigError("closed-form v needs the Gaussian pulse pair")
    x = np.asarray(x, dtype=float)
    erf = np.vectorize(math.erf, otypes=[float])
    b = 2 * COUPLING_EXPONENT
    a = 2 * PROBE_EXPONENT
    half_c = math.sqrt(math.pi / b) / 2
    c2 = pair.omega_c0**2
    v = c2 * half_c * (1 + erf(math.sqrt(b) * x))
    v = v + pair.R**2 * c2 * half_c * (1 + erf(math.sqrt(b) * (x - pair.x0)))
    if cross_term and pair.R:
        shrink = math.exp(-COUPLING_EXPONENT * pair.x0**2 / 2)
        v = v + 2 * pair.R * c2 * shrink * half_c * (1 + erf(math.sqrt(b) * (x - pair.x0 / 2)))
    if mode is Mode.EQUAL_KAPPA:
        v = v + pair.omega_p0**2 * math.sqrt(math.pi / a) / 2 * (1 + erf(math.sqrt(a) * x))
    return v


def pulse_area(pair: PulsePair, mode: Mode = Mode.EQUAL_KAPPA) -> float:
    """Closed-form ``v`` accumulated over the whole first Gaussian pulse pair."""
    s = pair.omega_c0**2 * math.sqrt(math.pi / (2 * COUPLING_EXPONENT))
    if mode is Mode.EQUAL_KAPPA:
        s += pair.omega_p0**2 * math.sqrt(math.pi / (2 * PROBE_EXPONENT))
    return s


def _cinterp(s, knots, values, fill):
    return (np.interp(s, knots, values.real, left=fill, right=fill)
            + 1j * np.interp(s, knots, values.imag, left=0.0, right=0.0))


@dataclass(frozen=True, eq=False)
class AdiabaticTables:
    """Travelling-wave profiles tabulated over the first pulse pair.

    ``x``/``v`` sample the map ``x -> v`` on the lattice; ``s`` are the
    knots of ``F_p``/``F_c`` with plateaus of ``v`` collapsed.  ``F_c`` is
    ``None`` in the weak-probe case.
    """

    pair: PulsePair
    mode: Mode
    u_slope: float
    x: np.ndarray
    v: np.ndarray
    s: np.ndarray
    f_p: np.ndarray
    f_c: np.ndarray | None
    S: float

    def v_at(self, x):
        return np.interp(x, self.x, self.v)

    def F_p(self, s):
        """Probe profile; zero outside the tabulated arguments."""
        fp = _cinterp(np.asarray(s, dtype=float), self.s, self.f_p, 0.0)
        if self.mode is Mode.EQUAL_KAPPA:
            fp, _ = self._normalised(s, fp)
        return fp

    def F_c(self, s):
        """Coupling profile; one outside the tabulated arguments."""
        if self.f_c is None:
            raise ConfigError("F_c is only tabulated when kappa12 == kappa32")
        s = np.asarray(s, dtype=float)
        fc = _cinterp(s, self.s, self.f_c, 1.0)
        _, fc = self._normalised(s, None, fc)
        return fc

    def _normalised(self, s, fp=None, fc=None):
        # interpolate both profiles, then restore |F_p|^2 + |F_c|^2 = 1
        if fp is None:
            fp = _cinterp(s, self.s, self.f_p, 0.0)
        if fc is None:
            fc = _cinterp(s, self.s, self.f_c, 1.0)
        norm = np.sqrt(abs(fp) ** 2 + abs(fc) ** 2)
        return fp / norm, fc / norm

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["s", "F_p", "F_c"])
            for i, s in enumerate(self.s):
                fc = "" if self.f_c is None else f"{self.f_c[i].real:.9g}"
                out.writerow([f"{s:.9g}", f"{self.f_p[i].real:.9g}", fc])
        return path


def default_mode(pair: PulsePair, medium: MediumParams) -> Mode:
    return Mode.EQUAL_KAPPA if medium.equal_kappa else Mode.WEAK_PROBE


def tabulate_profiles(pair: PulsePair, grid: GridSpec, medium: MediumParams,
                      mode: Mode | str | None = None) -> AdiabaticTables:
    mode = default_mode(pair, medium) if mode is None else Mode(mode)
    if mode is Mode.EQUAL_KAPPA and not medium.equal_kappa:
        raise ConfigError("equal-kappa profiles need kappa12 == kappa32")
    if mode is Mode.WEAK_PROBE:
        ratio = pair.omega_p0 / pair.omega_c0 if pair.omega_c0 else math.inf
        if ratio > WEAK_PROBE_RATIO:
            warnings.warn(f"probe/coupling ratio {ratio:.3g} exceeds {WEAK_PROBE_RATIO}; "
                          "the weak-probe profile is a poor approximation", stacklevel=2)

    x = grid.x
    v = build_v(pair, x, mode)
    window_end = pair.x0 - FIRST_WINDOW_GAP if pair.custom is None else x[-1]
    first = x <= window_end
    xs, vs = x[first], v[first]
    wp, wc = boundary_envelopes(pair, xs)
    g = _intensity(pair, xs, mode)
    keep = g > PLATEAU_FRAC * g.max() if g.max() > 0 else np.zeros_like(xs, dtype=bool)
    keep &= np.concatenate(([True], np.diff(vs) > 0))
    keep[0] = True
    xs, s, wp, wc = xs[keep], vs[keep], wp[keep], wc[keep]
    if mode is Mode.EQUAL_KAPPA:
        n = np.sqrt(abs(wp) ** 2 + abs(wc) ** 2)
        f_p = np.conj(wp) / n
        f_c = np.conj(wc) / n
    else:
        n = abs(wc)
        f_p = np.conj(wp) / n
        f_c = None
    return AdiabaticTables(pair=pair, mode=mode, u_slope=medium.kappa12, x=x, v=v, s=s,
                           f_p=f_p, f_c=f_c, S=float(s[-1]))


def reconstruct_fields(tables: AdiabaticTables, z, x):
    """Adiabatic ``(w_p, w_c)`` at depth ``z`` and time ``x`` (broadcasting)."""
    z, x = np.broadcast_arrays(np.asarray(z, dtype=float), np.asarray(x, dtype=float))
    arg = tables.v_at(x) - tables.u_slope * z
    wp0, wc0 = boundary_envelopes(tables.pair, x)
    if tables.mode is Mode.EQUAL_KAPPA:
        n = np.sqrt(abs(wp0) ** 2 + abs(wc0) ** 2)
        fp, fc = tables._normalised(arg)
        return np.conj(n * fp), np.conj(n * fc)
    return np.conj(abs(wc0) * tables.F_p(arg)), wc0


def coherence_map(tables: AdiabaticTables, z, x):
    """Dark-state ``A3`` along the adiabatic solution."""
    if tables.mode is Mode.EQUAL_KAPPA:
        z, x = np.broadcast_arrays(np.asarray(z, dtype=float), np.asarray(x, dtype=float))
        return -tables.F_p(tables.v_at(x) - tables.u_slope * z)
    wp, wc = reconstruct_fields(tables, z, x)
    n = np.sqrt(abs(wp) ** 2 + abs(wc) ** 2)
    return np.where(n > 0, -np.conj(wp) / np.where(n > 0, n, 1.0), 0j)


def coherence_peak(tables: AdiabaticTables) -> tuple[float, float]:
    """Argument ``s`` and value of the largest ``|F_p|``.

    A parabola through the three knots around the largest sample refines both.
    """
    mag = abs(tables.f_p)
    i = int(np.clip(np.argmax(mag), 1, mag.size - 2))
    s0, s1, s2 = tables.s[i - 1:i + 2]
    y0, y1, y2 = mag[i - 1:i + 2]
    # Lagrange form on unevenly spaced knots
    d01, d02, d12 = s0 - s1, s0 - s2, s1 - s2
    a = y0 / (d01 * d02) - y1 / (d01 * d12) + y2 / (d02 * d12)
    b = (-y0 * (s1 + s2) / (d01 * d02) + y1 * (s0 + s2) / (d01 * d12)
         - y2 * (s0 + s1) / (d02 * d12))
    c = y0 * s1 * s2 / (d01 * d02) - y1 * s0 * s2 / (d01 * d12) + y2 * s0 * s1 / (d02 * d12)
    if a >= 0:
        return float(s1), float(y1)
    s_peak = -b / (2 * a)
    return float(s_peak), float(c - b * b / (4 * a))


def coherence_peak_depth(tables: AdiabaticTables) -> float:
    """Depth where the coherence left behind by the first pulse pair is largest.

    Behind the first pulses ``v`` sits at ``S``, so the stored ``|A3|`` at depth
    ``z`` is ``|F_p(S - u(z))|``.
    """
    return (tables.S - coherence_peak(tables)[0]) / tables.u_slope


@dataclass
class AdiabaticSolution:
    fields: FieldGrid
    amps: AmplitudeGrid
    tables: AdiabaticTables

    def exit_peak(self):
        row = abs(self.fields.w_p[-1])
        j = int(np.argmax(row))
        return float(row[j]), float(self.fields.x[j])


def solve_adiabatic(pair: PulsePair, medium: MediumParams, grid: GridSpec,
                    mode: Mode | str | None = None) -> AdiabaticSolution:
    """Adiabatic fields and amplitudes on the output lattice of ``grid``.

    ``A2`` is the first-order correction evaluated from x-derivatives of the
    reconstructed fields.
    """
    tables = tabulate_profiles(pair, grid, medium, mode)
    x, z = grid.x, grid.z(medium.z_m)
    wp, wc = reconstruct_fields(tables, z[:, None], x[None, :])
    n = np.sqrt(abs(wp) ** 2 + abs(wc) ** 2)
    live = n > 0
    safe = np.where(live, n, 1.0)
    a1 = np.where(live, np.conj(wc) / safe, 1.0 + 0j)
    a3 = np.where(live, -np.conj(wp) / safe, 0j)
    dwp = np.gradient(wp, x, axis=1)
    dwc = np.gradient(wc, x, axis=1)
    a2 = a2_first_order_profile(wp, wc, dwp, dwc)
    return AdiabaticSolution(FieldGrid(x, z, wp, wc), AmplitudeGrid(x, z, a1, a2, a3), tables)
