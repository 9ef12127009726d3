"""Report figures rendered to files with the non-interactive Agg backend."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _map(ax, grid_x, grid_z, values, title):
    mesh = ax.pcolormesh(grid_x, grid_z, values, shading="auto", cmap="viridis", rasterized=True)
    ax.set_xlabel("t_r / tau")
    ax.set_ylabel("z (cm)")
    ax.set_title(title)
    ax.figure.colorbar(mesh, ax=ax)


def plot_maps(solution, path, label="") -> Path:
    """|w_p|, |w_c| and |A3| over the (z, x) lattice."""
    f, a = solution.fields, solution.amps
    fig, axes = plt.subplots(1, 3, figsize=(15, 4.2), constrained_layout=True)
    _map(axes[0], f.x, f.z, abs(f.w_p), f"|Omega_p tau| {label}".strip())
    _map(axes[1], f.x, f.z, abs(f.w_c), f"|Omega_c tau| {label}".strip())
    _map(axes[2], f.x, f.z, abs(a.a3), f"|A3| {label}".strip())
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return Path(path)


def plot_exit(solutions: dict, path) -> Path:
    """Probe envelope leaving the cell, one line per engine."""
    fig, ax = plt.subplots(figsize=(7, 4), constrained_layout=True)
    for name, sol in solutions.items():
        ax.plot(sol.fields.x, abs(sol.fields.w_p[-1]), label=name)
    ax.set_xlabel("t_r / tau")
    ax.set_ylabel("|Omega_p tau| at z_m")
    ax.legend()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return Path(path)


def plot_coherence_profile(solutions: dict, path) -> Path:
    """Stored |A3| against depth at the middle of the time window.

    On the default window that instant sits between the first pulse pair and
    the recurrence.
    """
    fig, ax = plt.subplots(figsize=(7, 4), constrained_layout=True)
    for name, sol in solutions.items():
        x = sol.fields.x
        j = int(np.searchsorted(x, 0.5 * (x[0] + x[-1])))
        ax.plot(sol.fields.z, abs(sol.amps.a3[:, j]), label=f"{name}, t_r/tau = {x[j]:.2f}")
    ax.set_xlabel("z (cm)")
    ax.set_ylabel("|A3|")
    ax.legend()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return Path(path)
