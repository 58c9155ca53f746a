"""Figures for the CLI report paths.

Rendering goes through the non-interactive Agg backend and writes straight to
a file next to the CSV/JSON output; nothing here is needed for the numbers.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from hypquad.rates import RateFit, predicted  # noqa: E402

COLORS = ["#0072b2", "#e69f00", "#009e72", "#d55c00", "#cc79a7"]

STYLE = {
    "font.family": "serif",
    "axes.labelsize": 11,
    "axes.titlesize": 11,
    "xtick.labelsize": 9,
    "ytick.labelsize": 9,
    "legend.fontsize": 9,
    "axes.edgecolor": "#222222",
    "savefig.dpi": 150,
}


def new_figure(width=5.0, height=None):
    height = height or width * (np.sqrt(5.0) - 1.0) / 2.0
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(width, height))
    return fig, ax


def rate_figure(fit: RateFit, path, *, ylabel="error", title=None, reference=None):
    """Log-log scatter of (n, value) with the fitted line.

    ``reference`` maps a legend label to a slope; each is drawn through the
    last fitted sample for visual comparison.
    """
    n = np.array([s[0] for s in fit.samples], dtype=float)
    v = np.array([s[1] for s in fit.samples])
    ok = v > 0
    with plt.rc_context(STYLE):
        fig, ax = new_figure()
        ax.loglog(n[ok], v[ok], "o", color=COLORS[0], label="measured")
        grid = np.geomspace(n[ok].min(), n[ok].max(), 64)
        label = f"fit slope {fit.slope:.3f}"
        if fit.log_correction_exponent:
            label += f" (log^{fit.log_correction_exponent:g} divided out)"
        ax.loglog(grid, predicted(fit, grid), "-", color=COLORS[1], label=label)
        for i, (name, slope) in enumerate((reference or {}).items()):
            anchor_n, anchor_v = n[ok][-1], v[ok][-1]
            ax.loglog(grid, anchor_v * (grid / anchor_n) ** slope, "--",
                      color=COLORS[2 + i % 3], label=name)
        ax.set_xlabel("n (function evaluations)")
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path)
    plt.close(fig)
    return path


def nodes_figure(nodes: np.ndarray, coefficients: np.ndarray, path, title=None):
    """Scatter of a 2-D grid, marker colour by coefficient sign."""
    with plt.rc_context(STYLE):
        fig, ax = new_figure(width=4.5, height=4.5)
        pos = coefficients > 0
        ax.scatter(nodes[pos, 0], nodes[pos, 1], s=4, color=COLORS[0], label="positive")
        ax.scatter(nodes[~pos, 0], nodes[~pos, 1], s=4, color=COLORS[3], label="negative")
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False, loc="upper right")
        fig.tight_layout()
        fig.savefig(path)
    plt.close(fig)
    return path
