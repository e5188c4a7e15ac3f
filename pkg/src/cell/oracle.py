"""
One-dimensional reference for laminar media at the lamination normal.

With Q(x) = q(x.xi) and p = xi/|xi| the corrector only depends on the depth s,
so u = t (1 - s/r) and the free boundary condition reduces to r * q(-r|xi|) = t.
"""

from __future__ import annotations

import logging
from typing import Callable, Tuple

import numpy as np
from scipy.optimize import brentq

from src.cell.corrector import SolveMode

logger = logging.getLogger(__name__)

PROFILE_SCAN = 4096


def laminar_oracle(
    profile: Callable,
    t: float,
    mode=SolveMode.MIN_SUPERSOLUTION,
    scan_step: float = 1e-3,
    xi_norm: float = 1.0,
) -> Tuple[float, float]:
    """
    Boundary depth and slope of the extremal 1-D solution.

    min_supersolution: smallest r with r * q(r) >= t.
    max_subsolution: largest r with r * q(r) <= t.

    Args:
        profile: Positive 1-periodic lamination profile.
        t: Dirichlet datum.
        mode: Which extremal solution.
        scan_step: Scan resolution before brentq refinement.
        xi_norm: |xi| of the lamination vector.

    Returns:
        (r, alpha) with alpha = t / r.
    """
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    mode = SolveMode.parse(mode)
    samples = np.asarray(profile(np.linspace(0.0, 1.0, PROFILE_SCAN, endpoint=False)), dtype=float)
    qmin, qmax = float(samples.min()), float(samples.max())

    def excess(r: float) -> float:
        return r * float(profile(-r * xi_norm)) - t

    if mode is SolveMode.MIN_SUPERSOLUTION:
        lo = t / qmax * (1.0 - 1e-6)
        if excess(lo) >= 0:
            return lo, t / lo
        r = lo
        while True:
            nxt = r + scan_step
            if excess(nxt) >= 0:
                root = brentq(excess, r, nxt, xtol=1e-13)
                break
            r = nxt
    else:
        hi = t / qmin * (1.0 + 1e-6)
        if excess(hi) <= 0:
            return hi, t / hi
        r = hi
        while True:
            nxt = r - scan_step
            if excess(nxt) <= 0:
                root = brentq(excess, nxt, r, xtol=1e-13)
                break
            r = nxt
    logger.debug("Laminar oracle %s t=%.3g: r=%.8f", mode.value, t, root)
    return float(root), t / float(root)
