"""Single-point atomic physics of the three-level Lambda system.

All quantities are dimensionless (``Omega*tau``, ``delta*tau``, ...).
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError
from .model import GridSpec, MediumParams, PulsePair, boundary_envelopes


@dataclass(frozen=True)
class EigenTriple:
    lambda0: complex
    lambda_plus: complex
    lambda_minus: complex


@dataclass(frozen=True)
class DarkState:
    a1: complex
    a2: complex
    a3: complex


def eigenvalues(w_p, w_c, delta=0.0, gamma2=0.0) -> EigenTriple:
    """Adiabatic eigenvalues; the zero root is factored out of the cubic."""
    half = (delta + 0.5j * gamma2) / 2
    root = cmath.sqrt(abs(w_p) ** 2 + abs(w_c) ** 2 + half**2)
    lp, lm = half + root, half - root
    if lp.real < lm.real:
        lp, lm = lm, lp
    return EigenTriple(0j, lp, lm)


def characteristic_residual(lam, w_p, w_c, delta=0.0, gamma2=0.0):
    d = delta + 0.5j * gamma2
    return lam**3 - d * lam**2 - (abs(w_p) ** 2 + abs(w_c) ** 2) * lam


def dark_state(w_p, w_c) -> DarkState:
    norm = np.sqrt(abs(w_p) ** 2 + abs(w_c) ** 2)
    if norm == 0:
        raise DegenerateInputError("dark state undefined when both fields vanish")
    return DarkState(np.conj(w_c) / norm, 0j, -np.conj(w_p) / norm)


def a2_first_order(w_p, w_c, dw_p_dx, dw_c_dx, form="auto"):
    """First-order adiabatic correction to the excited-state amplitude.

    ``form="a"`` uses ``-(i/Omega_p) dA1/dx``, ``form="b"`` uses
    ``-(i/Omega_c) dA3/dx``; ``"auto"`` picks whichever field is larger.
    Envelope derivatives are supplied by the caller.
    """
    wp, wc = complex(w_p), complex(w_c)
    dwp, dwc = complex(dw_p_dx), complex(dw_c_dx)
    n = np.sqrt(abs(wp) ** 2 + abs(wc) ** 2)
    if n == 0:
        raise DegenerateInputError("first-order A2 undefined when both fields vanish")
    dn = (wp.conjugate() * dwp + wc.conjugate() * dwc).real / n
    if form == "auto":
        form = "a" if abs(wp) >= abs(wc) else "b"
    if form == "a":
        if wp == 0:
            raise DegenerateInputError("form (a) needs a nonzero probe field")
        da1 = dwc.conjugate() / n - wc.conjugate() * dn / n**2
        return -1j / wp * da1
    if form == "b":
        if wc == 0:
            raise DegenerateInputError("form (b) needs a nonzero coupling field")
        da3 = -(dwp.conjugate() / n - wp.conjugate() * dn / n**2)
        return -1j / wc * da3
    raise ValueError(f"unknown form {form!r}")


def eigenvalue_profile(w_p, w_c, delta=0.0, gamma2=0.0):
    """Vectorised ``(lambda_plus, lambda_minus)`` along arrays of fields."""
    half = (delta + 0.5j * gamma2) / 2
    root = np.sqrt(abs(np.asarray(w_p)) ** 2 + abs(np.asarray(w_c)) ** 2 + half**2 + 0j)
    lp, lm = half + root, half - root
    swap = lp.real < lm.real
    return np.where(swap, lm, lp), np.where(swap, lp, lm)


def adiabaticity_margin(pair: PulsePair, medium: MediumParams, grid: GridSpec,
                        support_frac: float = 1e-3) -> float:
    """Smallest gap between the dark eigenvalue and the bright ones while the probe is on."""
    x = np.linspace(grid.x_min, grid.x_max, max(grid.n_x, 4001))
    wp, wc = boundary_envelopes(pair, x)
    on = abs(wp) > support_frac * pair.omega_p0
    if not on.any():
        return float("inf")
    lp, lm = eigenvalue_profile(wp[on], wc[on], medium.delta, medium.gamma2)
    return float(np.minimum(abs(lp), abs(lm)).min())


def a2_first_order_profile(w_p, w_c, dw_p_dx, dw_c_dx):
    """Vectorised ``a2_first_order(form="auto")``; zero where both fields vanish."""
    wp, wc = np.asarray(w_p, dtype=complex), np.asarray(w_c, dtype=complex)
    dwp, dwc = np.asarray(dw_p_dx, dtype=complex), np.asarray(dw_c_dx, dtype=complex)
    n = np.sqrt(abs(wp) ** 2 + abs(wc) ** 2)
    live = n > 0
    safe_n = np.where(live, n, 1.0)
    dn = (np.conj(wp) * dwp + np.conj(wc) * dwc).real / safe_n
    use_a = abs(wp) >= abs(wc)
    da1 = np.conj(dwc) / safe_n - np.conj(wc) * dn / safe_n**2
    da3 = -(np.conj(dwp) / safe_n - np.conj(wp) * dn / safe_n**2)
    with np.errstate(divide="ignore", invalid="ignore"):
        a2 = np.where(use_a, -1j * da1 / wp, -1j * da3 / wc)
    return np.where(live, a2, 0j)
