"""Figure rendering for the report paths.

All figures go straight to files through the Agg backend; nothing here
ever opens a window. Functions return the path they wrote.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .model import ReactorConfig  # noqa: E402

_DPI = 120


def save_trajectory_figure(cfg: ReactorConfig, trajectory, path) -> Path:
    """Two stacked panels: resource concentrations and biomass over time.

    trajectory rows are (t, s, x, phase); impulse rows show up as dots so
    the jumps stand out against the flow curves.
    """
    path = Path(path)
    ts = np.array([row[0] for row in trajectory])
    S = np.array([row[1] for row in trajectory])
    xs = np.array([row[2] for row in trajectory])
    phases = [row[3] for row in trajectory]

    fig, (ax_s, ax_x) = plt.subplots(2, 1, sharex=True, figsize=(8, 6))
    for i in range(cfg.n):
        ax_s.plot(ts, S[:, i], lw=1.0, label=f"s{i + 1}")
    ax_s.axhline(cfg.s1_bar, color="gray", ls="--", lw=0.8, label="decant threshold")
    ax_s.set_ylabel("resource concentration")
    ax_s.legend(loc="best", fontsize=8)

    ax_x.plot(ts, xs, lw=1.0, color="tab:green")
    jump = [k for k, ph in enumerate(phases) if ph == "impulse"]
    if jump:
        ax_x.plot(ts[jump], xs[jump], ".", ms=4, color="tab:red")
    ax_x.set_xlabel("time")
    ax_x.set_ylabel("biomass")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_projection_figure(cfg: ReactorConfig, trajectory, j: int, path) -> Path:
    """Phase-plane projection of the trajectory onto (s1, s_j), 1-based j."""
    path = Path(path)
    S = np.array([row[1] for row in trajectory])
    fig, ax = plt.subplots(figsize=(6, 5))
    ax.plot(S[:, 0], S[:, j - 1], lw=0.8)
    ax.axvline(cfg.s1_bar, color="gray", ls="--", lw=0.8)
    ax.set_xlabel("s1")
    ax.set_ylabel(f"s{j}")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_mu_sweep_figure(rs, mus, r_star_value, path) -> Path:
    """Per-cycle gain against decant fraction, with the sign-change marked."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.plot(rs, mus, lw=1.2)
    ax.axhline(0.0, color="gray", ls=":", lw=0.8)
    if r_star_value is not None:
        ax.axvline(r_star_value, color="tab:red", ls="--", lw=0.9)
        ax.annotate(f"sign change at r={r_star_value:.4f}",
                    xy=(r_star_value, 0.0), xytext=(5, 8),
                    textcoords="offset points", fontsize=8)
    ax.set_xlabel("decant fraction r")
    ax.set_ylabel("per-cycle biomass gain")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_levelsets_figure(grid_s1, grid_s2, values, threshold_s1, path,
                          label="per-cycle biomass gain") -> Path:
    """Filled contour of a scalar field over the (s1, s2) plane."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6.5, 5))
    masked = np.ma.masked_invalid(values)
    cs = ax.contourf(grid_s1, grid_s2, masked, levels=21, cmap="viridis")
    ax.contour(grid_s1, grid_s2, masked, levels=[0.0], colors="white", linewidths=1.2)
    ax.axvline(threshold_s1, color="gray", ls="--", lw=0.8)
    fig.colorbar(cs, ax=ax, label=label)
    ax.set_xlabel("s1")
    ax.set_ylabel("s2")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path
