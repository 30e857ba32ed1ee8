"""SVG plots for experiment results (matplotlib, Agg backend).

Sweep plots require a 2-dimensional weight grid; the degradation plot works
for any number of attributes.  SVG output is stripped of volatile metadata
so repeated runs stay diffable.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .errors import InvalidParameters
from .experiments import DegradationCurve, SweepResult

plt.rcParams["svg.hashsalt"] = "oversim"

_SAVE_KW = {"format": "svg", "metadata": {"Date": None}}


def _require_2d(result: SweepResult, what: str) -> None:
    if result.grid.shape[1] != 2:
        raise InvalidParameters(f"{what} needs a 2-dimensional weight grid")


def sweep_scatter_svg(result: SweepResult, path) -> None:
    """Equivalence set in the weight plane, with the reference w* starred."""
    _require_2d(result, "sweep scatter")
    fig, ax = plt.subplots(figsize=(5, 4.2))
    eq = list(result.equivalent_set)
    rest = [i for i in range(result.grid.shape[0]) if i not in set(eq)]
    ax.scatter(result.grid[rest, 0], result.grid[rest, 1], s=8, c="0.85", label="different")
    ax.scatter(result.grid[eq, 0], result.grid[eq, 1], s=16, c="tab:blue",
               label=f"deviation <= {result.tau:g}")
    ax.scatter([result.w_star.w[0]], [result.w_star.w[1]], marker="*", s=160,
               c="tab:red", label="w*")
    ax.set_xlabel(f"w[{result.sensitive_names[0]}]")
    ax.set_ylabel(f"w[{result.sensitive_names[1]}]")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def sweep_heatmap_svg(result: SweepResult, path) -> None:
    """Deviation fraction over the weight grid (row-major reshape)."""
    _require_2d(result, "sweep heatmap")
    n0, n1 = result.grid_shape
    dev = result.deviation.reshape(n0, n1)
    lo0, hi0 = result.grid[:, 0].min(), result.grid[:, 0].max()
    lo1, hi1 = result.grid[:, 1].min(), result.grid[:, 1].max()
    fig, ax = plt.subplots(figsize=(5.4, 4.2))
    im = ax.imshow(dev, origin="lower", aspect="auto",
                   extent=(lo1, hi1, lo0, hi0), cmap="viridis")
    fig.colorbar(im, ax=ax, label="deviation fraction")
    ax.set_xlabel(f"w[{result.sensitive_names[1]}]")
    ax.set_ylabel(f"w[{result.sensitive_names[0]}]")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def degradation_lines_svg(curve: DegradationCurve, path) -> None:
    """Normalized mean change per attribute vs. corrections, std shaded."""
    fig, ax = plt.subplots(figsize=(5.4, 4))
    ks = list(curve.ks)
    for li, name in enumerate(curve.sensitive_names):
        mean = curve.mean_normalized[li]
        std = curve.std_normalized[li]
        line, = ax.plot(ks, mean, marker="o", markersize=3, label=name)
        ax.fill_between(ks, mean - std, mean + std, alpha=0.2, color=line.get_color())
    ax.set_xlabel("corrections k")
    ax.set_ylabel("normalized change in rho")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
