"""
SVG figures for the CLI commands (matplotlib, Agg backend).
"""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Dict, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

logger = logging.getLogger(__name__)

# Date metadata off so repeated runs write identical files
SVG_METADATA = {"Date": None}


def _save(fig, path: Union[str, Path]) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
    logger.debug("Wrote figure %s", path)
    return path


def plot_sweep(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    """Polar plot of q_lower and q_upper against theta with the rms_mean circle."""
    ok = frame[frame["status"] == "ok"].sort_values("theta")
    fig = plt.figure(figsize=(6, 6))
    ax = fig.add_subplot(projection="polar")
    if len(ok):
        theta = np.append(ok["theta"].to_numpy(), ok["theta"].iloc[0] + 2.0 * math.pi)
        for column, style in (("q_upper", "-o"), ("q_lower", "--s")):
            values = np.append(ok[column].to_numpy(), ok[column].iloc[0])
            ax.plot(theta, values, style, markersize=3, label=column)
        rms = float(ok["rms_mean"].iloc[0])
        circle = np.linspace(0.0, 2.0 * math.pi, 361)
        ax.plot(circle, np.full_like(circle, rms), ":", color="grey", label="rms mean")
    ax.set_title("Pinning interval endpoints")
    ax.legend(loc="lower left", fontsize="small")
    return _save(fig, path)


def plot_shapes(
    obstacle: np.ndarray,
    fronts: Dict[str, np.ndarray],
    facets: Dict[str, Sequence],
    path: Union[str, Path],
) -> Path:
    """Obstacle, free boundaries and their facets."""
    fig, ax = plt.subplots(figsize=(6, 6))
    closed = np.vstack([obstacle, obstacle[:1]])
    ax.fill(closed[:, 0], closed[:, 1], color="lightgrey", label="obstacle")
    for label, pts in fronts.items():
        loop = np.vstack([pts, pts[:1]])
        ax.plot(loop[:, 0], loop[:, 1], linewidth=1.0, label=label)
        for facet in facets.get(label, []):
            a, b = pts[facet.start], pts[facet.stop % len(pts)]
            ax.plot([a[0], b[0]], [a[1], b[1]], linewidth=2.5, alpha=0.6)
    ax.set_aspect("equal")
    ax.legend(fontsize="small")
    ax.set_title("Free boundaries around the obstacle")
    return _save(fig, path)


def plot_direction_functions(curves: Dict[str, np.ndarray], thetas: np.ndarray, path: Union[str, Path]) -> Path:
    fig, ax = plt.subplots(figsize=(8, 4))
    for label, values in curves.items():
        ax.plot(thetas, values, linewidth=1.0, label=label)
    ax.set_xlabel("theta")
    ax.set_xlim(0.0, 2.0 * math.pi)
    ax.legend(fontsize="small")
    return _save(fig, path)


def plot_bend(taus: np.ndarray, before: np.ndarray, after: np.ndarray, path: Union[str, Path]) -> Path:
    """Free boundary depth per column before and after bending."""
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(taus, before, label="original")
    ax.plot(taus, after, label="bent")
    ax.invert_yaxis()
    ax.set_xlabel("tangential position")
    ax.set_ylabel("free boundary depth")
    ax.legend(fontsize="small")
    return _save(fig, path)
