"""SVG figures for distributions, sweeps and emulated tomography.

All figures are 800 x 600 SVG user units (matplotlib writes SVG at 72
units per inch) and carry no timestamp, so reruns give identical files.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .observables import PositionDistribution  # noqa: E402
from .sweep import SweepResult  # noqa: E402

SVG_WIDTH, SVG_HEIGHT = 800, 600
H_COLOR = "#d62728"
V_COLOR = "#1f77b4"
# gamma = 0, 0.1, 0.2 curves: red, blue, wine
CURVE_COLORS = ["#d62728", "#1f77b4", "#7b1f3a", "#2ca02c", "#9467bd", "#8c564b"]

params = {
    "font.family": "serif",
    "font.serif": ["DejaVu Serif"],
    "mathtext.fontset": "stix",
    "font.size": 13,
    "axes.labelsize": 15,
    "axes.linewidth": 1.0,
    "legend.fontsize": 12,
    "legend.frameon": False,
    "xtick.direction": "in",
    "ytick.direction": "in",
    "xtick.top": True,
    "ytick.right": True,
    "lines.linewidth": 1.6,
    "svg.hashsalt": "asymwalk",
    "svg.fonttype": "path",
}


def _figure(nrows: int = 1, ncols: int = 1):
    with plt.rc_context(params):
        fig, axes = plt.subplots(nrows, ncols, figsize=(SVG_WIDTH / 72, SVG_HEIGHT / 72))
    return fig, axes


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    with plt.rc_context(params):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_distribution(dist: PositionDistribution, path: str | Path, title: str = "") -> Path:
    """Bar chart of H and V probabilities per site."""
    fig, ax = _figure()
    with plt.rc_context(params):
        w = 0.8
        ax.bar(dist.x, dist.p_h, width=w, color=H_COLOR, label="H")
        ax.bar(dist.x, dist.p_v, width=w, bottom=dist.p_h, color=V_COLOR, label="V")
        t = dist.t
        ax.set_xlim(-t - 1, t + 1)
        ax.set_xticks(np.arange(-t, t + 1, 4) if t >= 4 else dist.x)
        ax.set_xlabel("Position $x$")
        ax.set_ylabel("Probability")
        ax.legend(loc="upper left")
        if title:
            ax.set_title(title)
        fig.tight_layout()
    return _save(fig, path)


def _phi_ticks(ax, values: Sequence[float]) -> None:
    hi = max(values)
    ticks = [k * math.pi / 4 for k in range(5) if k * math.pi / 4 <= hi + 1e-12]
    labels = ["0", r"$\pi/4$", r"$\pi/2$", r"$3\pi/4$", r"$\pi$"][: len(ticks)]
    ax.set_yticks(ticks)
    ax.set_yticklabels(labels)


def _extent(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float, float]:
    def edges(v):
        if len(v) == 1:
            return v[0] - 0.5, v[0] + 0.5
        return v[0] - 0.5 * (v[1] - v[0]), v[-1] + 0.5 * (v[-1] - v[-2])

    return (*edges(x), *edges(y))


def plot_heatmap(result: SweepResult, path: str | Path) -> Path:
    """Side-by-side S_E and IPR maps over theta and phi."""
    grid = result.grid
    fig, axes = _figure(1, 2)
    theta = np.asarray(grid.theta_axis)
    second = np.asarray(grid.second_axis)
    with plt.rc_context(params):
        for ax, data, label in ((axes[0], result.s_e, "$S_E$"), (axes[1], result.ipr, "IPR")):
            # embedded raster keeps large grids small
            mesh = ax.imshow(
                data,
                origin="lower",
                aspect="auto",
                cmap="jet",
                interpolation="nearest",
                extent=_extent(theta, second),
            )
            fig.colorbar(mesh, ax=ax, orientation="horizontal", pad=0.15, label=label)
            ax.set_xlabel(r"$\theta$ (deg)")
            if grid.second_axis_kind == "phi":
                ax.set_ylabel(r"$\phi$")
                _phi_ticks(ax, second)
            else:
                ax.set_ylabel(r"$\gamma$")
        fig.tight_layout()
    return _save(fig, path)


def plot_curves(result: SweepResult, path: str | Path) -> Path:
    """S_E and IPR versus theta, one line per second-axis value."""
    grid = result.grid
    fig, axes = _figure(2, 1)
    sym = r"\gamma" if grid.second_axis_kind == "gamma" else r"\phi"
    with plt.rc_context(params):
        for row, value in enumerate(grid.second_axis):
            color = CURVE_COLORS[row % len(CURVE_COLORS)]
            lab = f"${sym}={value:g}$"
            axes[0].plot(grid.theta_axis, result.s_e[row], color=color, label=lab)
            axes[1].plot(grid.theta_axis, result.ipr[row], color=color, label=lab)
        axes[0].set_ylabel("$S_E$")
        axes[1].set_ylabel("IPR")
        axes[1].set_xlabel(r"$\theta$ (deg)")
        axes[0].legend(loc="best")
        for ax in axes:
            ax.set_xlim(grid.theta_axis[0], grid.theta_axis[-1])
        fig.tight_layout()
    return _save(fig, path)


def plot_tomography(
    gammas: Sequence[float],
    measured: Mapping[float, Mapping[str, Sequence[float]]],
    exact: Mapping[float, Mapping[str, Sequence[float]]],
    path: str | Path,
) -> Path:
    """Reconstructed S_E and IPR versus gamma with error bars, per theta.

    ``measured[theta]`` holds ``s_e``, ``s_e_err``, ``ipr``, ``ipr_err``
    lists aligned with ``gammas``; ``exact[theta]`` holds ``gamma``,
    ``s_e`` and ``ipr`` for the solid reference lines.
    """
    fig, axes = _figure(1, 2)
    with plt.rc_context(params):
        for i, theta in enumerate(measured):
            color = CURVE_COLORS[i % len(CURVE_COLORS)]
            m, e = measured[theta], exact[theta]
            lab = rf"$\theta={theta:g}^\circ$"
            axes[0].plot(e["gamma"], e["s_e"], color=color)
            axes[0].errorbar(gammas, m["s_e"], yerr=m["s_e_err"], fmt="o", color=color, capsize=3, label=lab)
            axes[1].plot(e["gamma"], e["ipr"], color=color)
            axes[1].errorbar(gammas, m["ipr"], yerr=m["ipr_err"], fmt="s", color=color, capsize=3, label=lab)
        axes[0].set_ylabel("$S_E$")
        axes[1].set_ylabel("IPR")
        for ax in axes:
            ax.set_xlabel(r"$\gamma$")
        axes[0].legend(loc="best")
        fig.tight_layout()
    return _save(fig, path)
