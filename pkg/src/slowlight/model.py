"""Dimensionless data model, boundary pulse shapes and configuration checks.

Units used throughout the package:

* time is the retarded time in units of the probe pulse length, ``x = t_r/tau``;
* half-Rabi frequencies are stored as ``Omega*tau``;
* depth ``z`` is in cm and the coupling constants ``kappa*tau`` in 1/cm;
* detuning and decay are ``delta*tau`` and ``gamma2*tau``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError

# exponent factors of the Gaussian boundary pulses
PROBE_EXPONENT = 1.0
COUPLING_EXPONENT = 0.2

# ratio used for every "much greater than" applicability check
MUCH_GREATER = 10.0


@dataclass(frozen=True, eq=False)
class CustomEnvelope:
    """Sampled boundary envelopes, linearly interpolated and zero outside."""

    x: np.ndarray
    w_p: np.ndarray
    w_c: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 1 or x.size < 2 or np.any(np.diff(x) <= 0):
            raise ConfigError("custom envelope abscissae must be strictly increasing")
        object.__setattr__(self, "x", x)
        for name in ("w_p", "w_c"):
            arr = np.asarray(getattr(self, name), dtype=complex)
            if arr.shape != x.shape:
                raise ConfigError(f"custom envelope {name} must match x in shape")
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class PulsePair:
    """Probe/coupling envelopes entering the medium at z = 0.

    With ``custom`` unset the pair is the Gaussian family
    ``w_p = omega_p0 exp(-x^2)`` and
    ``w_c = omega_c0 (exp(-0.2 x^2) + R exp(-0.2 (x - x0)^2))``.
    """

    omega_p0: float
    omega_c0: float
    R: float = 0.0
    x0: float = 11.0
    custom: CustomEnvelope | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.omega_p0 < 0 or self.omega_c0 < 0:
            raise ConfigError("peak Rabi frequencies must be non-negative")
        if self.R < 0:
            raise ConfigError("recurrence ratio R must be non-negative")

    @property
    def shape(self) -> str:
        return "gaussian" if self.custom is None else "custom"

    def shifted(self, dx: float) -> "PulsePair":
        """Same pulses delayed by ``dx`` (returned as a custom envelope)."""
        env = self.custom
        if env is None:
            xs = np.linspace(-8.0, self.x0 + 8.0, 8001)
            wp, wc = boundary_envelopes(self, xs)
            env = CustomEnvelope(xs, wp, wc)
        return PulsePair(self.omega_p0, self.omega_c0, self.R, self.x0 + dx,
                         CustomEnvelope(env.x + dx, env.w_p, env.w_c))


@dataclass(frozen=True)
class MediumParams:
    kappa12: float
    kappa32: float
    gamma2: float = 0.0
    delta: float = 0.0
    z_m: float = 8.0

    def __post_init__(self):
        if not (self.kappa12 > 0 and self.kappa32 > 0):
            raise ConfigError("coupling constants must be positive")
        if self.gamma2 < 0:
            raise ConfigError("gamma2 must be non-negative")
        if not self.z_m > 0:
            raise ConfigError("cell length z_m must be positive")

    @property
    def equal_kappa(self) -> bool:
        return math.isclose(self.kappa12, self.kappa32, rel_tol=1e-12)


@dataclass(frozen=True)
class GridSpec:
    """Output lattice: ``n_x`` retarded-time samples by ``n_z`` depths."""

    x_min: float
    x_max: float
    n_x: int
    n_z: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ConfigError(f"grid window is empty: x_min={self.x_min}, x_max={self.x_max}")
        if self.n_x < 2 or self.n_z < 2:
            raise ConfigError(f"grid needs n_x >= 2 and n_z >= 2, got {self.n_x}, {self.n_z}")

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_x)

    def z(self, z_m: float) -> np.ndarray:
        return np.linspace(0.0, z_m, self.n_z)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_x - 1)


def default_grid(pair: PulsePair, medium: MediumParams, n_x: int = 1024,
                 dz_out: float = 0.05) -> GridSpec:
    """Reference window ``[-6, x0 + 6]`` with a modest output lattice.

    The solver subdivides this lattice internally; see ``SolverOptions``.
    """
    n_z = int(math.ceil(medium.z_m / dz_out - 1e-9)) + 1
    return GridSpec(-6.0, pair.x0 + 6.0, n_x, n_z)


@dataclass
class FieldGrid:
    """Complex ``Omega*tau`` of probe and coupling on a (z, x) lattice."""

    x: np.ndarray
    z: np.ndarray
    w_p: np.ndarray
    w_c: np.ndarray


@dataclass
class AmplitudeGrid:
    x: np.ndarray
    z: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    a3: np.ndarray

    def norm(self) -> np.ndarray:
        return abs(self.a1) ** 2 + abs(self.a2) ** 2 + abs(self.a3) ** 2


def boundary_envelopes(pair: PulsePair, x):
    """Return ``(w_p, w_c)`` at the cell entrance for scalar or array ``x``."""
    x = np.asarray(x, dtype=float)
    if pair.custom is not None:
        env = pair.custom
        wp = (np.interp(x, env.x, env.w_p.real, left=0.0, right=0.0)
              + 1j * np.interp(x, env.x, env.w_p.imag, left=0.0, right=0.0))
        wc = (np.interp(x, env.x, env.w_c.real, left=0.0, right=0.0)
              + 1j * np.interp(x, env.x, env.w_c.imag, left=0.0, right=0.0))
        return wp, wc
    wp = pair.omega_p0 * np.exp(-PROBE_EXPONENT * x**2)
    wc = pair.omega_c0 * (np.exp(-COUPLING_EXPONENT * x**2)
                          + pair.R * np.exp(-COUPLING_EXPONENT * (x - pair.x0) ** 2))
    return wp.astype(complex), wc.astype(complex)


def boundary_derivatives(pair: PulsePair, x):
    """Analytic d/dx of the boundary envelopes (finite differences for custom)."""
    x = np.asarray(x, dtype=float)
    if pair.custom is not None:
        env = pair.custom
        dwp = np.gradient(env.w_p, env.x)
        dwc = np.gradient(env.w_c, env.x)
        return (np.interp(x, env.x, dwp.real, left=0.0, right=0.0)
                + 1j * np.interp(x, env.x, dwp.imag, left=0.0, right=0.0),
                np.interp(x, env.x, dwc.real, left=0.0, right=0.0)
                + 1j * np.interp(x, env.x, dwc.imag, left=0.0, right=0.0))
    a, b = PROBE_EXPONENT, COUPLING_EXPONENT
    dwp = -2 * a * x * pair.omega_p0 * np.exp(-a * x**2)
    dwc = pair.omega_c0 * (-2 * b * x * np.exp(-b * x**2)
                           - 2 * b * (x - pair.x0) * pair.R * np.exp(-b * (x - pair.x0) ** 2))
    return dwp.astype(complex), dwc.astype(complex)


@dataclass(frozen=True)
class Check:
    name: str
    ratio: float
    threshold: float
    passed: bool
    applicable: bool = True
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks if c.applicable)

    def failures(self):
        return [c for c in self.checks if c.applicable and not c.passed]

    def __getitem__(self, name) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {c.name: asdict(c) for c in self.checks}


def validate_config(pair: PulsePair, medium: MediumParams, grid: GridSpec | None = None) -> ValidationReport:
    """Applicability checks for the adiabatic regime at peak field values."""
    if grid is not None and not isinstance(grid, GridSpec):
        raise ConfigError("grid must be a GridSpec")
    checks = []

    wc0 = pair.omega_c0
    checks.append(Check("strong_coupling", wc0, MUCH_GREATER, wc0 >= MUCH_GREATER,
                        detail="Omega_c0*tau >> 1"))

    if pair.custom is None:
        # 1/e half-widths scale as exponent^-1/2
        length_ratio = math.sqrt(PROBE_EXPONENT / COUPLING_EXPONENT)
    else:
        length_ratio = _rms_width(pair.custom.x, pair.custom.w_c) / max(
            _rms_width(pair.custom.x, pair.custom.w_p), 1e-300)
    checks.append(Check("coupling_longer", length_ratio, 1.0, length_ratio > 1.0,
                        detail="coupling pulse longer than probe pulse"))

    delta = abs(medium.delta)
    far = delta > wc0
    ratio = wc0**2 / delta if delta > 0 else math.inf
    checks.append(Check("far_detuned", ratio, MUCH_GREATER, ratio >= MUCH_GREATER,
                        applicable=far, detail="|Omega_c0 tau|^2 / |delta tau| >> 1 when delta > Omega_c0"))

    if grid is not None:
        if pair.custom is None:
            lo, hi = -5.0, pair.x0 + 5.0
        else:
            support = pair.custom.x[(abs(pair.custom.w_p) + abs(pair.custom.w_c)) > 0]
            lo, hi = (support[0], support[-1]) if support.size else (0.0, 0.0)
        margin = min(lo - grid.x_min, grid.x_max - hi)
        checks.append(Check("window_covers_pulses", margin, 0.0, margin >= 0.0,
                            detail=f"window [{grid.x_min}, {grid.x_max}] must contain [{lo}, {hi}]"))
    return ValidationReport(tuple(checks))


def _rms_width(x, w):
    p = abs(np.asarray(w)) ** 2
    total = np.trapezoid(p, x)
    if total <= 0:
        return 0.0
    mean = np.trapezoid(x * p, x) / total
    return math.sqrt(np.trapezoid((x - mean) ** 2 * p, x) / total)


# -- configuration files -------------------------------------------------------

PAIR_KEYS = ("omega_p0", "omega_c0", "R", "x0")
MEDIUM_KEYS = ("kappa12", "kappa32", "gamma2", "delta", "z_m")
GRID_KEYS = ("x_min", "x_max", "n_x", "n_z")


@dataclass(frozen=True)
class RunConfig:
    pair: PulsePair
    medium: MediumParams
    grid: GridSpec
    name: str = ""
    # keyword overrides for the numerical solver's options
    solver: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"name": self.name} if self.name else {}
        out.update({k: getattr(self.pair, k) for k in PAIR_KEYS})
        out.update(asdict(self.medium))
        out.update(asdict(self.grid))
        if self.solver:
            out["solver"] = dict(self.solver)
        return out


def config_from_dict(data: dict) -> RunConfig:
    try:
        pair = PulsePair(**{k: float(data[k]) for k in PAIR_KEYS if k in data})
        medium = MediumParams(**{k: float(data[k]) for k in MEDIUM_KEYS if k in data})
    except TypeError as exc:
        raise ConfigError(f"missing configuration key: {exc}") from None
    unknown = set(data) - set(PAIR_KEYS) - set(MEDIUM_KEYS) - set(GRID_KEYS) - {"name", "shape", "solver"}
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    if data.get("shape", "gaussian") != "gaussian":
        raise ConfigError("only the gaussian shape can be read from a config file")
    grid = default_grid(pair, medium)
    given = {k: data[k] for k in GRID_KEYS if k in data}
    if given:
        base = asdict(grid)
        base.update(given)
        grid = GridSpec(float(base["x_min"]), float(base["x_max"]), int(base["n_x"]), int(base["n_z"]))
    solver = data.get("solver", {})
    if not isinstance(solver, dict):
        raise ConfigError("'solver' must be a JSON object")
    return RunConfig(pair, medium, grid, str(data.get("name", "")), dict(solver))


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return config_from_dict(data)
