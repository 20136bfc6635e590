"""Figure helpers for the CLI report directory."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.family": "serif",
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}


def size(width: float = 5.0) -> tuple[float, float]:
    return width, width * (math.sqrt(5.0) - 1.0) / 2.0


def new(width: float = 5.0):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=size(width))
    return fig, ax


def save(fig, path: Path) -> Path:
    with plt.rc_context(STYLE):
        fig.tight_layout()
        fig.savefig(path)
    plt.close(fig)
    return path


def inventory_paths(start: np.ndarray, phases, weights: np.ndarray, labels, path: Path) -> Path:
    """Remaining fluid inventory of each product across the trace phases."""
    fig, ax = new()
    level = np.asarray(start, dtype=float).copy()
    t = 0.0
    times, levels = [0.0], [level.copy()]
    for S, dt in phases:
        idx = list(S)
        if idx:
            level[idx] -= dt * weights[idx] / (1.0 + weights[idx].sum())
        t += dt
        times.append(t)
        levels.append(np.maximum(level, 0.0).copy())
    levels = np.array(levels)
    for k, lab in enumerate(labels):
        if start[k] > 0:
            ax.plot(times, levels[:, k], marker=".", label=lab)
    ax.set_xlabel("customers arrived")
    ax.set_ylabel("fluid inventory left")
    if np.any(np.asarray(start) > 0):
        ax.legend(frameon=False)
    return save(fig, path)


def stacked_allocation(alloc: np.ndarray, labels, path: Path) -> Path:
    fig, ax = new()
    x = np.arange(alloc.shape[1])
    bottom = np.zeros(alloc.shape[1])
    for k, row in enumerate(alloc):
        ax.bar(x, row, bottom=bottom, label=f"type {k + 1}")
        bottom += row
    ax.set_xticks(x, labels)
    ax.set_xlabel("product")
    ax.set_ylabel("units allocated")
    ax.legend(frameon=False)
    return save(fig, path)


def stock_vs_sales(stock, sold, labels, path: Path) -> Path:
    fig, ax = new()
    x = np.arange(len(stock))
    ax.bar(x - 0.2, stock, width=0.4, label="stocked")
    ax.bar(x + 0.2, sold, width=0.4, label="mean sold")
    ax.set_xticks(x, labels)
    ax.set_xlabel("product")
    ax.set_ylabel("units")
    ax.legend(frameon=False)
    return save(fig, path)


def margins(values, title: str, path: Path) -> Path:
    fig, ax = new()
    values = np.asarray(values, dtype=float)
    ax.hist(values, bins=min(40, max(5, len(values) // 5)), color="0.4")
    ax.axvline(0.0, color="k", lw=0.8, ls="--")
    ax.set_xlabel("margin (>= 0 passes)")
    ax.set_ylabel("checks")
    ax.set_title(title)
    return save(fig, path)
