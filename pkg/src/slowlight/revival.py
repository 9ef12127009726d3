"""Closed-form predictions for the probe pulse regenerated by a delayed coupling pulse.

All times are ``(t_r - t_d)/tau``, measured from the centre of the second
coupling pulse.  The first pulse pair is taken to have deposited its whole
area ``S`` in ``v`` before the recurrence arrives, so the exit condition
``v(t) - kappa12 z_m = f S`` condenses to

    erf(sqrt(2/5) t) = (alpha - f beta) / R^2 - 1

with ``f = 1, 1/2, 0`` for the start, middle and end of the exit window.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import DomainError, EscapeError, NoMatchedR
from .model import MediumParams, PulsePair

SQRT_5PI_2 = math.sqrt(5 * math.pi / 2)
SQRT_5PI_8 = math.sqrt(5 * math.pi / 8)
SQRT_PI_2 = math.sqrt(math.pi / 2)
SQRT_PI_8 = math.sqrt(math.pi / 8)
# erf argument per unit time for the coupling Gaussian exp(-x^2 / 5)
COUPLING_RATE = math.sqrt(2 / 5)


def erf(x: float) -> float:
    return math.erf(x)


def erfinv(y: float, tol: float = 1e-14) -> float:
    """Inverse error function by Newton iteration safeguarded with bisection."""
    if not -1.0 < y < 1.0:
        raise DomainError(f"erfinv needs -1 < y < 1, got {y!r}")
    if y == 0.0:
        return 0.0
    # erf is odd; solve for |y| and restore the sign
    target, sign = abs(y), math.copysign(1.0, y)
    lo, hi = 0.0, 1.0
    while math.erf(hi) < target:
        lo, hi = hi, 2 * hi
    x = 0.5 * (lo + hi)
    for _ in range(200):
        fx = math.erf(x) - target
        if fx > 0:
            hi = x
        else:
            lo = x
        step = fx / (2 / math.sqrt(math.pi) * math.exp(-x * x))
        new = x - step
        if not lo < new < hi:
            new = 0.5 * (lo + hi)
        if abs(new - x) <= tol * max(1.0, abs(x)):
            return sign * new
        x = new
    return sign * x


def first_pair_area(pair: PulsePair) -> float:
    """``S``: total ``v`` carried by the first Gaussian probe/coupling pair."""
    return pair.omega_c0**2 * SQRT_5PI_2 + pair.omega_p0**2 * SQRT_PI_2


def coefficients(pair: PulsePair, medium: MediumParams) -> tuple[float, float]:
    """``(alpha, beta)`` of the condensed exit equation."""
    scale = pair.omega_c0**2 * SQRT_5PI_2
    alpha = 2 * medium.kappa12 * medium.z_m / scale
    beta = 2 * first_pair_area(pair) / scale
    return alpha, beta


def escape_minimum_R(alpha: float, beta: float) -> float | None:
    """Smallest R giving a full exit window, or ``None`` if no R can.

    The window needs ``-1 < (alpha - f beta)/R^2 - 1 < 1`` for ``f`` in [0, 1].
    The lower bound reduces to ``alpha > beta`` for every R; the upper bound
    is tightest at ``f = 0`` and gives ``R > sqrt(alpha / 2)``.
    """
    if alpha <= beta:
        return None
    return math.sqrt(alpha / 2)


def exit_time(alpha: float, beta: float, R: float, f: float) -> float:
    if R <= 0:
        raise EscapeError("no recurrence pulse (R = 0): nothing regenerates",
                          r_min=escape_minimum_R(alpha, beta))
    y = (alpha - f * beta) / R**2 - 1
    if not -1.0 < y < 1.0:
        r_min = escape_minimum_R(alpha, beta)
        hint = (f"; need R > {r_min:.6g}" if r_min is not None
                else "; the first pulse already leaves the medium, no R helps")
        raise EscapeError(f"exit condition unreachable at f={f}: erf argument {y:.6g} outside (-1, 1)"
                          + hint, r_min=r_min)
    return erfinv(y) / COUPLING_RATE


@dataclass(frozen=True)
class RevivalEstimate:
    alpha: float
    beta: float
    t_r1: float
    t_rm: float
    t_r2: float
    peak_wp: float
    fwhm: float
    matched_R: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def revival_times(pair: PulsePair, medium: MediumParams) -> tuple[float, float, float]:
    """``(t_r1, t_rm, t_r2)`` relative to the recurrence centre."""
    alpha, beta = coefficients(pair, medium)
    return tuple(exit_time(alpha, beta, pair.R, f) for f in (1.0, 0.5, 0.0))


def revival_peak(pair: PulsePair, t_rm: float) -> float:
    """Probe amplitude at the exit when the profile argument reaches ``S/2``."""
    if pair.R == 0:
        return 0.0
    dark = pair.omega_p0 / math.hypot(pair.omega_c0, pair.omega_p0)
    return pair.R * pair.omega_c0 * math.exp(-0.2 * t_rm**2) * dark


def matched_R(pair: PulsePair, medium: MediumParams) -> float:
    """Recurrence amplitude that puts the profile argument ``S/2`` at ``t_d``."""
    c = pair.omega_c0**2 * SQRT_5PI_8
    num = medium.kappa12 * medium.z_m - c - pair.omega_p0**2 * SQRT_PI_8
    if num <= 0 or c == 0:
        raise NoMatchedR(f"kappa12*z_m = {medium.kappa12 * medium.z_m:.6g} is too small: "
                         "the first pulse pair would pass through the medium")
    return math.sqrt(num / c)


def fwhm_estimate(pair: PulsePair, R: float) -> float:
    """Exit-window width from the linearised ``v`` around the recurrence centre."""
    if R == 0:
        raise DomainError("width estimate needs R > 0")
    ratio2 = abs(pair.omega_p0 / pair.omega_c0) ** 2
    return SQRT_5PI_2 / R**2 * (1 + ratio2 / math.sqrt(5))


def predict(pair: PulsePair, medium: MediumParams) -> RevivalEstimate:
    alpha, beta = coefficients(pair, medium)
    t1, tm, t2 = revival_times(pair, medium)
    try:
        r_match = matched_R(pair, medium)
    except NoMatchedR:
        r_match = None
    return RevivalEstimate(alpha=alpha, beta=beta, t_r1=t1, t_rm=tm, t_r2=t2,
                           peak_wp=revival_peak(pair, tm), fwhm=fwhm_estimate(pair, pair.R),
                           matched_R=r_match)
