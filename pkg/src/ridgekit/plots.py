"""Figure rendering for the CLI report path.

Every function writes a PNG next to the delimited export it illustrates.
Rendering is optional everywhere and deterministic (Agg backend, fixed
metadata), so figure files fall under the same reproducibility guarantee as
the text outputs.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 150
_META = {"Software": "ridgekit"}


def _save(fig, path):
    fig.savefig(path, dpi=_DPI, metadata=_META)
    plt.close(fig)


def plot_summary(path, Y: np.ndarray, f: np.ndarray, objective: str = "f"):
    """Sufficient-summary scatter: output against one or two projected
    coordinates (the second coordinate becomes the color axis)."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    if Y.shape[1] == 1:
        ax.scatter(Y[:, 0], f, s=12, color="#30567d", alpha=0.8, linewidths=0)
        ax.set_xlabel("$y_1$")
        ax.set_ylabel(objective)
    else:
        sc = ax.scatter(Y[:, 0], Y[:, 1], c=f, s=14, cmap="viridis", linewidths=0)
        fig.colorbar(sc, ax=ax, label=objective)
        ax.set_xlabel("$y_1$")
        ax.set_ylabel("$y_2$")
    fig.tight_layout()
    _save(fig, path)


def plot_eigen_report(path, report):
    """Eigenvalue decay on a log axis with the bootstrap min/max band."""
    w = np.asarray(report.eigenvalues, dtype=float)
    k = np.arange(1, len(w) + 1)
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    positive = np.clip(w, 1e-300, None)
    if report.bootstrap_lo is not None:
        lo = np.clip(np.asarray(report.bootstrap_lo), 1e-300, None)
        hi = np.clip(np.asarray(report.bootstrap_hi), 1e-300, None)
        ax.fill_between(k, lo, hi, color="#c7d7ea", label="subsample range")
    ax.semilogy(k, positive, "o-", color="#30567d", label="all samples")
    ax.set_xlabel("index")
    ax.set_ylabel("eigenvalue")
    ax.legend(frameon=False)
    fig.tight_layout()
    _save(fig, path)


def plot_contour(path, Y1: np.ndarray, Y2: np.ndarray, V: np.ndarray,
                 objective: str = "value", points: np.ndarray | None = None):
    """Filled contour map of a 2-D response surface, optionally with the
    training projections overlaid."""
    fig, ax = plt.subplots(figsize=(4.6, 3.8))
    cs = ax.contourf(Y1, Y2, V, levels=16, cmap="viridis")
    fig.colorbar(cs, ax=ax, label=objective)
    if points is not None and len(points):
        ax.plot(points[:, 0], points[:, 1], ".", color="white",
                markersize=3, alpha=0.7)
    ax.set_xlabel("$y_1$")
    ax.set_ylabel("$y_2$")
    fig.tight_layout()
    _save(fig, path)


def plot_parallel_coordinates(path, designs: np.ndarray, weights: np.ndarray):
    """One weighted polyline per design across the input axes."""
    designs = np.atleast_2d(np.asarray(designs, dtype=float))
    weights = np.asarray(weights, dtype=float)
    d = designs.shape[1]
    axes = np.arange(1, d + 1)
    fig, ax = plt.subplots(figsize=(max(5.0, 0.3 * d), 3.6))
    for i, x in enumerate(designs):
        ax.plot(axes, x * weights, "-", alpha=0.85, label=f"design {i}")
    ax.set_xlabel("design variable")
    ax.set_ylabel("weighted value")
    ax.set_xticks(axes[:: max(1, d // 12)])
    if len(designs) <= 8:
        ax.legend(frameon=False, fontsize=7)
    fig.tight_layout()
    _save(fig, path)
