"""Deterministic SVG figures.

Figures are drawn with matplotlib on the Agg backend under a fixed style. The
SVG hash salt is pinned and the date is dropped, so identical data yields
byte-identical files. Each file carries the run checksum in its
``Identifier`` metadata field.
"""

from __future__ import annotations

from contextlib import contextmanager
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["STYLE", "save_svg", "heatmaps", "histogram_figure", "alignment_figure", "line_figure", "bar_figure"]

STYLE = {
    "svg.hashsalt": "randtensors",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.titlesize": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "lines.linewidth": 1.2,
    "figure.dpi": 100,
}


@contextmanager
def _styled():
    with plt.rc_context(STYLE):
        yield


def save_svg(fig, path, stamp: str) -> Path:
    """Write ``fig`` as SVG with deterministic metadata and close it."""
    path = Path(path)
    meta = {"Date": None, "Creator": "randtensors", "Identifier": f"sha256:{stamp}"}
    with _styled():
        fig.savefig(path, format="svg", metadata=meta)
    plt.close(fig)
    return path


def heatmaps(panels, path, stamp: str, title: str = "") -> Path:
    """Side-by-side ``|M|`` images for ``panels = [(label, matrix), ...]``."""
    with _styled():
        fig, axes = plt.subplots(1, len(panels), figsize=(3.2 * len(panels), 3.0), squeeze=False)
        vmax = max(float(np.max(np.abs(m))) for _, m in panels) or 1.0
        for ax, (label, m) in zip(axes[0], panels):
            im = ax.imshow(np.abs(m), cmap="viridis", vmin=0, vmax=vmax, interpolation="nearest")
            ax.set_title(label)
            ax.set_xlabel("column index")
            ax.set_ylabel("row index")
        fig.colorbar(im, ax=list(axes[0]), shrink=0.8, label="magnitude")
        if title:
            fig.suptitle(title)
        return save_svg(fig, path, stamp)


def histogram_figure(edges, empirical, limit, path, stamp: str, xlabel: str, title: str = "") -> Path:
    """Empirical density histogram with the limit density at the bin centers."""
    edges = np.asarray(edges)
    centers = (edges[:-1] + edges[1:]) / 2
    with _styled():
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        ax.stairs(empirical, edges, fill=True, color="#9ecae1", label="empirical")
        ax.plot(centers, limit, color="#08519c", label="limit law")
        ax.set_xlim(edges[0], edges[-1])
        ax.set_xlabel(xlabel)
        ax.set_ylabel("density")
        if title:
            ax.set_title(title)
        ax.legend()
        return save_svg(fig, path, stamp)


def alignment_figure(betas, mean, std, theory, feasible, path, stamp: str, title: str = "") -> Path:
    """Empirical mean alignment (with one-sigma band) and the predicted alignment per mode."""
    betas = np.asarray(betas)
    mean, std, theory = (np.asarray(a, dtype=float).reshape(len(betas), -1) for a in (mean, std, theory))
    feasible = np.asarray(feasible, dtype=bool)
    with _styled():
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        for k in range(mean.shape[1]):
            suffix = f" (mode {k + 1})" if mean.shape[1] > 1 else ""
            line = ax.plot(betas, mean[:, k], marker="o", markersize=3, label="empirical" + suffix)[0]
            ax.fill_between(betas, mean[:, k] - std[:, k], mean[:, k] + std[:, k], color=line.get_color(), alpha=0.15)
            ax.plot(betas[feasible], theory[feasible, k], linestyle="--", color=line.get_color(), label="limit" + suffix)
        ax.set_xlabel("signal strength beta")
        ax.set_ylabel("alignment |<u, x>|")
        ax.set_ylim(0, 1.05)
        if title:
            ax.set_title(title)
        ax.legend()
        return save_svg(fig, path, stamp)


def line_figure(x, series, path, stamp: str, xlabel: str, ylabel: str, title: str = "") -> Path:
    """Overlay of ``series = [(label, y, linestyle), ...]`` against ``x``."""
    with _styled():
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        for label, y, style in series:
            ax.plot(x, y, linestyle=style, label=label)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        ax.legend()
        return save_svg(fig, path, stamp)


def bar_figure(labels, values, path, stamp: str, ylabel: str, threshold: float | None = None, title: str = "") -> Path:
    """Bar chart with an optional horizontal threshold line."""
    with _styled():
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        ax.bar(range(len(values)), values, color="#6baed6")
        ax.set_xticks(range(len(values)), labels, rotation=45, ha="right")
        if threshold is not None:
            ax.axhline(threshold, color="#cb181d", linestyle="--", label="tolerance")
            ax.legend()
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        return save_svg(fig, path, stamp)
