"""SVG figures, each drawn only from rows that are also written as data"""
from pathlib import Path
from typing import Any, Dict, List, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed ids inside the svg so reruns give the same bytes
matplotlib.rcParams["svg.hashsalt"] = "reversible-lab"
matplotlib.rcParams["svg.fonttype"] = "none"


def save_svg(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def portrait(rows: Sequence[Sequence[float]], title: str = ""):
    """stream plot of (rho', phi') over the (phi, rho) grid"""
    arr = np.asarray(rows, dtype=float)
    rhos = np.unique(arr[:, 0])
    phis = np.unique(arr[:, 1])
    rho_dot = arr[:, 2].reshape(len(rhos), len(phis))
    phi_dot = arr[:, 3].reshape(len(rhos), len(phis))
    fig, ax = plt.subplots(figsize=(6, 4.5))
    speed = np.hypot(rho_dot / np.ptp(rhos), phi_dot / np.ptp(phis))
    ax.streamplot(phis, rhos, phi_dot, rho_dot, color=speed, cmap="viridis", density=1.2, linewidth=0.8)
    ax.set_xlabel("phi = q theta")
    ax.set_ylabel("rho")
    ax.set_title(title)
    return fig


def sweep_counts(rows: List[Dict[str, Any]], title: str = ""):
    mus = [r["mu"] for r in rows]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for key, style in (("saddle", "o-"), ("center", "s--")):
        ax.plot(mus, [r[key] for r in rows], style, markersize=3, label=key)
    ax.set_xlabel("mu")
    ax.set_ylabel("equilibria")
    ax.legend()
    ax.set_title(title)
    return fig


def region_map(rows: List[Dict[str, Any]], x_key: str, y_key: str, value_key: str, title: str = ""):
    """heat map of an integer count over a rectangular (x, y) grid in row order"""
    xs = sorted({r[x_key] for r in rows})
    ys = sorted({r[y_key] for r in rows})
    grid = np.full((len(ys), len(xs)), np.nan)
    for r in rows:
        grid[ys.index(r[y_key]), xs.index(r[x_key])] = r[value_key]
    fig, ax = plt.subplots(figsize=(6, 4))
    mesh = ax.imshow(grid, origin="lower", aspect="auto", interpolation="nearest",
                     extent=(min(xs), max(xs), min(ys), max(ys)) if len(xs) > 1 and len(ys) > 1 else None)
    fig.colorbar(mesh, ax=ax, label=value_key)
    ax.set_xlabel(x_key)
    ax.set_ylabel(y_key)
    ax.set_title(title)
    return fig


def loglog(xs: Sequence[float], series: Dict[str, Sequence[float]], xlabel: str, title: str = ""):
    fig, ax = plt.subplots(figsize=(5, 4))
    for label, ys in series.items():
        ax.loglog(xs, ys, "o-", markersize=3, label=label)
    ax.set_xlabel(xlabel)
    ax.legend()
    ax.set_title(title)
    return fig
