"""Full numerical solution of the coupled amplitude/field equations.

In the retarded frame the atomic equations are ODEs in ``x`` at fixed depth
and the field equations are ODEs in ``z`` at fixed ``x``.  The solver marches
in ``z``: each row of atoms is integrated across the whole time window with
classical RK4, then the fields advance one depth step, by default with
classical RK4 as well and optionally with a two-stage predictor-corrector.

The stored ``FieldGrid``/``AmplitudeGrid`` live on the output lattice of the
``GridSpec``; the march itself runs on a lattice that subdivides every output
interval ``x_substeps`` times in ``x`` and at least ``z_substeps`` times in
``z``, so output points of different refinements coincide exactly.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import RefinementRequired
from .model import AmplitudeGrid, FieldGrid, GridSpec, MediumParams, PulsePair, boundary_envelopes

log = logging.getLogger(__name__)

STIFFNESS_LIMIT = 0.5


@dataclass(frozen=True)
class SolverOptions:
    """Compute-lattice controls.

    ``lambda_dx`` bounds ``|lambda+| dx`` at the strongest boundary field and
    ``dz_max`` bounds the depth step away from the entrance.  Output interval
    ``i`` is cut into ``ceil(entrance_grading / (i + 1))`` times more depth
    steps, because leftover non-adiabatic amplitude drives fast depth dynamics
    just behind the entrance.  ``refine`` multiplies every subdivision.
    """

    refine: int = 1
    lambda_dx: float = 0.025
    dz_max: float = 0.0025
    interp: str = "cubic"
    z_scheme: str = "rk4"
    entrance_grading: int = 16
    x_substeps: int | None = None
    z_substeps: int | None = None

    def __post_init__(self):
        if self.refine not in (1, 2, 4):
            raise ValueError("refine must be 1, 2 or 4")
        if self.interp not in ("linear", "cubic"):
            raise ValueError("interp must be 'linear' or 'cubic'")
        if self.z_scheme not in ("heun", "rk4"):
            raise ValueError("z_scheme must be 'heun' or 'rk4'")
        if self.entrance_grading < 1:
            raise ValueError("entrance_grading must be >= 1")


@dataclass
class SolveResult:
    fields: FieldGrid
    amps: AmplitudeGrid
    norm_max_dev: float
    flux_max_dev: float
    flux_residual: float
    x_substeps: int
    z_substeps: int

    def exit_peak(self):
        """Peak ``|w_p|`` at the cell exit and its retarded time."""
        row = abs(self.fields.w_p[-1])
        j = int(np.argmax(row))
        return float(row[j]), float(self.fields.x[j])

    def summary(self) -> dict:
        peak, t_peak = self.exit_peak()
        return {
            "norm_max_dev": self.norm_max_dev,
            "flux_max_dev": self.flux_max_dev,
            "flux_residual": self.flux_residual,
            "exit_peak_wp": peak,
            "exit_peak_x": t_peak,
            "x_substeps": self.x_substeps,
            "z_substeps": self.z_substeps,
        }


@njit(cache=True)
def _atoms_kernel(wp, wc, dx, d, cubic, a1_out, a2_out, a3_out):
    n = wp.size
    a1 = 1.0 + 0j
    a2 = 0j
    a3 = 0j
    a1_out[0] = a1
    a2_out[0] = a2
    a3_out[0] = a3
    h = dx
    h2 = 0.5 * dx
    for j in range(n - 1):
        p0 = wp[j]
        p1 = wp[j + 1]
        c0 = wc[j]
        c1 = wc[j + 1]
        if cubic and j >= 1 and j <= n - 3:
            pm = (9.0 * (p0 + p1) - wp[j - 1] - wp[j + 2]) / 16.0
            cm = (9.0 * (c0 + c1) - wc[j - 1] - wc[j + 2]) / 16.0
        else:
            pm = 0.5 * (p0 + p1)
            cm = 0.5 * (c0 + c1)

        k1a = 1j * p0 * a2
        k1b = 1j * (p0.conjugate() * a1 + c0.conjugate() * a3 + d * a2)
        k1c = 1j * c0 * a2

        b1 = a1 + h2 * k1a
        b2 = a2 + h2 * k1b
        b3 = a3 + h2 * k1c
        k2a = 1j * pm * b2
        k2b = 1j * (pm.conjugate() * b1 + cm.conjugate() * b3 + d * b2)
        k2c = 1j * cm * b2

        b1 = a1 + h2 * k2a
        b2 = a2 + h2 * k2b
        b3 = a3 + h2 * k2c
        k3a = 1j * pm * b2
        k3b = 1j * (pm.conjugate() * b1 + cm.conjugate() * b3 + d * b2)
        k3c = 1j * cm * b2

        b1 = a1 + h * k3a
        b2 = a2 + h * k3b
        b3 = a3 + h * k3c
        k4a = 1j * p1 * b2
        k4b = 1j * (p1.conjugate() * b1 + c1.conjugate() * b3 + d * b2)
        k4c = 1j * c1 * b2

        a1 = a1 + h * (k1a + 2.0 * k2a + 2.0 * k3a + k4a) / 6.0
        a2 = a2 + h * (k1b + 2.0 * k2b + 2.0 * k3b + k4b) / 6.0
        a3 = a3 + h * (k1c + 2.0 * k2c + 2.0 * k3c + k4c) / 6.0
        a1_out[j + 1] = a1
        a2_out[j + 1] = a2
        a3_out[j + 1] = a3


def max_bright_eigenvalue(w_p, w_c, delta=0.0, gamma2=0.0) -> float:
    half = (delta + 0.5j * gamma2) / 2
    n2 = float(np.max(abs(w_p) ** 2 + abs(w_c) ** 2))
    root = np.sqrt(n2 + half**2 + 0j)
    return float(max(abs(half + root), abs(half - root)))


def integrate_atoms_at_z(w_p_row, w_c_row, medium: MediumParams, dx: float, interp="cubic"):
    """Integrate ``(A1, A2, A3)`` across one row starting from ``(1, 0, 0)``."""
    wp = np.ascontiguousarray(w_p_row, dtype=complex)
    wc = np.ascontiguousarray(w_c_row, dtype=complex)
    lam = max_bright_eigenvalue(wp, wc, medium.delta, medium.gamma2)
    if lam * dx > STIFFNESS_LIMIT:
        refine = 2 ** math.ceil(math.log2(lam * dx / STIFFNESS_LIMIT))
        raise RefinementRequired(
            f"|lambda+| = {lam:.4g} makes |lambda+|*dx = {lam * dx:.3g} > {STIFFNESS_LIMIT}; "
            f"refine the time lattice by at least {refine}",
            lambda_max=lam, suggested_refine=refine)
    out = np.empty((3, wp.size), dtype=complex)
    d = complex(medium.delta, 0.5 * medium.gamma2)
    _atoms_kernel(wp, wc, float(dx), d, interp == "cubic", out[0], out[1], out[2])
    return out[0], out[1], out[2]


def polarization(a1, a2, a3, medium: MediumParams):
    """z-derivatives of ``(w_p, w_c)`` implied by the atomic amplitudes."""
    a2c = np.conj(a2)
    return -1j * medium.kappa12 * a1 * a2c, -1j * medium.kappa32 * a3 * a2c


def step_fields(amps, fields, medium: MediumParams, dz: float, dx: float, interp="cubic"):
    """Heun step in ``z``; returns the new fields and the atoms there."""
    wp, wc = fields
    sp, sc = polarization(*amps, medium)
    pred = integrate_atoms_at_z(wp + dz * sp, wc + dz * sc, medium, dx, interp)
    sp2, sc2 = polarization(*pred, medium)
    wp_new = wp + 0.5 * dz * (sp + sp2)
    wc_new = wc + 0.5 * dz * (sc + sc2)
    return (wp_new, wc_new), integrate_atoms_at_z(wp_new, wc_new, medium, dx, interp)


def step_fields_rk4(amps, fields, medium: MediumParams, dz: float, dx: float, interp="cubic"):
    """Classical RK4 step in ``z``; four row integrations per step."""
    wp, wc = fields
    k1 = polarization(*amps, medium)
    a = integrate_atoms_at_z(wp + 0.5 * dz * k1[0], wc + 0.5 * dz * k1[1], medium, dx, interp)
    k2 = polarization(*a, medium)
    a = integrate_atoms_at_z(wp + 0.5 * dz * k2[0], wc + 0.5 * dz * k2[1], medium, dx, interp)
    k3 = polarization(*a, medium)
    a = integrate_atoms_at_z(wp + dz * k3[0], wc + dz * k3[1], medium, dx, interp)
    k4 = polarization(*a, medium)
    wp = wp + dz / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    wc = wc + dz / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return (wp, wc), integrate_atoms_at_z(wp, wc, medium, dx, interp)


def substeps(pair: PulsePair, medium: MediumParams, grid: GridSpec, options: SolverOptions):
    """Compute-lattice subdivisions ``(sx, sz)`` honouring the stiffness and dz rules."""
    if options.x_substeps is None:
        xs = np.linspace(grid.x_min, grid.x_max, 20001)
        wp, wc = boundary_envelopes(pair, xs)
        lam = max_bright_eigenvalue(wp, wc, medium.delta, medium.gamma2)
        sx = max(1, math.ceil(lam * grid.dx / options.lambda_dx))
    else:
        sx = options.x_substeps
    if options.z_substeps is None:
        dz_out = medium.z_m / (grid.n_z - 1)
        sz = max(1, math.ceil(dz_out / options.dz_max - 1e-9))
    else:
        sz = options.z_substeps
    return sx * options.refine, sz * options.refine


def depth_schedule(n_z: int, sz: int, grading: int) -> list[int]:
    """Depth steps per output interval."""
    return [sz * max(1, math.ceil(grading / (i + 1))) for i in range(n_z - 1)]


def solve(pair: PulsePair, medium: MediumParams, grid: GridSpec,
          options: SolverOptions | None = None) -> SolveResult:
    options = options or SolverOptions()
    sx, sz = substeps(pair, medium, grid, options)
    nxc = (grid.n_x - 1) * sx + 1
    dx = grid.dx / sx
    dz_out = medium.z_m / (grid.n_z - 1)
    xc = np.linspace(grid.x_min, grid.x_max, nxc)
    step = step_fields if options.z_scheme == "heun" else step_fields_rk4
    schedule = depth_schedule(grid.n_z, sz, options.entrance_grading)
    log.info("solve: %d x points, %d z steps, dx=%.3g, dz=%.3g",
             nxc, sum(schedule), dx, dz_out / sz)

    shape = (grid.n_z, grid.n_x)
    out = {k: np.empty(shape, dtype=complex) for k in ("wp", "wc", "a1", "a2", "a3")}

    def store(row, f, a):
        for key, val in zip(("wp", "wc", "a1", "a2", "a3"), (*f, *a)):
            out[key][row] = val[::sx]

    def flux(f):
        return abs(f[0]) ** 2 / medium.kappa12 + abs(f[1]) ** 2 / medium.kappa32

    def norm_dev(a):
        return float(np.max(abs(abs(a[0]) ** 2 + abs(a[1]) ** 2 + abs(a[2]) ** 2 - 1)))

    fields = boundary_envelopes(pair, xc)
    amps = integrate_atoms_at_z(*fields, medium, dx, options.interp)
    store(0, fields, amps)
    flux0 = flux(fields)
    flux_scale = max(float(flux0.max()), 1e-300)
    worst_norm = norm_dev(amps)
    worst_flux = 0.0
    resid = 0.0
    # last five rows as (dz taken to reach them, F, |A2|^2)
    hist = deque([(0.0, flux0, abs(amps[1]) ** 2)], maxlen=5)

    for i, m in enumerate(schedule):
        dz = dz_out / m
        for _ in range(m):
            fields, amps = step(amps, fields, medium, dz, dx, options.interp)
            worst_norm = max(worst_norm, norm_dev(amps))
            f = flux(fields)
            worst_flux = max(worst_flux, float(np.max(abs(f - flux0))) / flux_scale)
            hist.append((dz, f, abs(amps[1]) ** 2))
            if len(hist) == 5 and all(h[0] == dz for h in list(hist)[1:]):
                resid = max(resid, _flux_residual(hist, dz, dx, medium.gamma2))
        store(i + 1, fields, amps)

    z = grid.z(medium.z_m)
    x = grid.x
    return SolveResult(
        fields=FieldGrid(x, z, out["wp"], out["wc"]),
        amps=AmplitudeGrid(x, z, out["a1"], out["a2"], out["a3"]),
        norm_max_dev=worst_norm,
        flux_max_dev=worst_flux,
        flux_residual=resid,
        x_substeps=sx,
        z_substeps=sz,
    )


def _flux_residual(hist, dz, dx, gamma2):
    """Max of ``dF/dz + d|A2|^2/dx + gamma2 |A2|^2`` on the middle of five uniform rows.

    Fourth-order central differences in both directions, interior points only.
    """
    f = [h[1] for h in hist]
    a2sq = hist[2][2]
    dfdz = (f[0] - 8 * f[1] + 8 * f[3] - f[4])[2:-2] / (12 * dz)
    da2 = (a2sq[:-4] - 8 * a2sq[1:-3] + 8 * a2sq[3:-1] - a2sq[4:]) / (12 * dx)
    return float(np.max(abs(dfdz + da2 + gamma2 * a2sq[2:-2])))
