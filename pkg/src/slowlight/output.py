"""Grid dumps, JSON summaries and run manifests."""

from __future__ import annotations

import json
import platform
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path

import numpy as np

from .model import AmplitudeGrid, FieldGrid

CSV_HEADER = "x,z,re_wp,im_wp,abs_wp,re_wc,im_wc,abs_wc,abs_a1,abs_a2,abs_a3"


def write_grid_csv(fields: FieldGrid, amps: AmplitudeGrid, path) -> Path:
    """One row per lattice point, z-major, 9 significant digits."""
    path = Path(path)
    zz, xx = np.meshgrid(fields.z, fields.x, indexing="ij")
    cols = [xx, zz, fields.w_p.real, fields.w_p.imag, abs(fields.w_p),
            fields.w_c.real, fields.w_c.imag, abs(fields.w_c),
            abs(amps.a1), abs(amps.a2), abs(amps.a3)]
    table = np.column_stack([c.ravel() for c in cols])
    # "+ 0.0" folds negative zeros so equal runs give identical bytes
    np.savetxt(path, table + 0.0, fmt="%.9g", delimiter=",", header=CSV_HEADER, comments="")
    return path


@dataclass
class GridDump:
    """A grid read back from CSV; amplitudes carry magnitudes only."""

    fields: FieldGrid
    amps: AmplitudeGrid


def read_grid_csv(path) -> GridDump:
    with open(path) as fh:
        header = fh.readline().strip()
    if header != CSV_HEADER:
        raise ValueError(f"{path}: unexpected header {header!r}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    x = np.unique(data[:, 0])
    z = np.unique(data[:, 1])
    shape = (z.size, x.size)
    if data.shape[0] != z.size * x.size:
        raise ValueError(f"{path}: rows do not form a complete lattice")

    def col(i):
        return data[:, i].reshape(shape)

    fields = FieldGrid(x, z, col(2) + 1j * col(3), col(5) + 1j * col(6))
    amps = AmplitudeGrid(x, z, col(8).astype(complex), col(9).astype(complex), col(10).astype(complex))
    return GridDump(fields, amps)


def write_json(data, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def versions() -> dict:
    out = {"python": platform.python_version()}
    for dist in ("artifact", "numpy", "numba", "matplotlib"):
        try:
            out[dist] = metadata.version(dist)
        except metadata.PackageNotFoundError:
            out[dist] = None
    return out


@dataclass
class RunManifest:
    config: dict
    engine: str
    options: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    wall_time_s: float = 0.0
    versions: dict = field(default_factory=versions)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "engine": self.engine,
            "options": self.options,
            "outputs": {k: str(v) for k, v in self.outputs.items()},
            "wall_time_s": self.wall_time_s,
            "versions": self.versions,
        }

    def write(self, path) -> Path:
        return write_json(self.to_dict(), path)
