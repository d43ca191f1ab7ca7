"""Static regret-vs-time figures (SVG via matplotlib's Agg backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

BOUND_LABELS = {
    "bound_thm1": "log-regime bound",
    "bound_thm2": "weak instance-dependent bound",
    "bound_thm3": "instance-independent bound",
    "bound_thm4": "bounded-smoothness bound",
}

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.figsize": (5.0, 3.4),
    "svg.hashsalt": "csucb",
    "svg.fonttype": "none",
}


def render_chart(result, path, log_x: bool = True, overlays=None, title=None) -> Path:
    """Mean cumulative regret with a one-std band and dashed bound overlays.

    ``overlays`` restricts which bound columns are drawn (default: all in
    ``result.bounds``); pass an empty list for the regret band only.
    """
    t = np.asarray(result.checkpoints, dtype=float)
    if t.size == 0:
        raise ValueError("nothing to plot: no checkpoints")
    names = list(result.bounds) if overlays is None else list(overlays)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(t, result.mean, color="C0", lw=1.5, label=f"CS-UCB mean regret ({result.runs} runs)")
        ax.fill_between(t, result.mean - result.std, result.mean + result.std, color="C0", alpha=0.25, lw=0)
        for j, name in enumerate(names):
            ax.plot(t, result.bounds[name], ls="--", lw=1.0, color=f"C{j + 1}", label=BOUND_LABELS.get(name, name))
        if log_x:
            ax.set_xscale("log")
        if names:
            ax.set_yscale("symlog", linthresh=1.0)
            low = float(np.nanmin(result.mean - result.std))
            ax.set_ylim(bottom=min(0.0, 2.0 * low))
        ax.set_xlabel("round t")
        ax.set_ylabel("cumulative sleeping regret")
        if title:
            ax.set_title(title)
        ax.legend(loc="upper left", frameon=False)
        fig.tight_layout()
        path = Path(path)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path
