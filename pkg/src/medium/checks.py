"""
Sample-based invariant checks for periodic media.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Dict

import numpy as np

from src.medium.medium import PeriodicMedium, rms_mean

logger = logging.getLogger(__name__)

PERIODICITY_TOL = 1e-12
BOUND_TOL = 1e-9


@dataclass
class MediumCheckReport:
    """Outcome of the medium checks."""

    periodicity_defect: float
    bound_violation: float
    lipschitz_ratio: float
    rms_mean: float
    passed: bool

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def check_medium(
    medium: PeriodicMedium,
    seed: int = 0,
    n_points: int = 100,
    sample_grid: int = 512,
) -> MediumCheckReport:
    """
    Run the periodicity, bound, Lipschitz and rms checks on a medium.

    Args:
        medium: Medium to check.
        seed: Seed for the random sample points.
        n_points: Number of random points (and pairs) to sample.
        sample_grid: Side of the uniform sample grid for the bound check.

    Returns:
        MediumCheckReport; `passed` is False when any check fails.
    """
    rng = np.random.default_rng(seed)

    x = rng.uniform(0.0, 1.0, size=(n_points, 2))
    k = rng.integers(-2, 3, size=(n_points, 2)).astype(float)
    periodicity = float(np.max(np.abs(medium(x + k) - medium(x))))

    axis = np.arange(sample_grid) / sample_grid
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    values = medium(np.stack([xx, yy], axis=-1))
    violation = max(medium.qmin - float(values.min()), float(values.max()) - medium.qmax, 0.0)

    y = x + rng.uniform(-0.05, 0.05, size=x.shape)
    dist = np.hypot(*(x - y).T)
    diffs = np.abs(medium(x) - medium(y))
    if medium.lipschitz > 0:
        ratio = float(np.max(diffs / (medium.lipschitz * np.maximum(dist, 1e-300))))
    else:
        ratio = 0.0 if float(diffs.max()) <= PERIODICITY_TOL else float("inf")

    rms = rms_mean(medium)
    passed = (
        periodicity <= PERIODICITY_TOL
        and violation <= BOUND_TOL
        and ratio <= 1.0 + 1e-9
        and medium.qmin - BOUND_TOL <= rms <= medium.qmax + BOUND_TOL
    )
    if not passed:
        logger.warning(
            "Medium checks failed for %s: periodicity=%.3e bounds=%.3e lipschitz_ratio=%.3f rms=%.6f",
            medium.describe(), periodicity, violation, ratio, rms,
        )
    return MediumCheckReport(periodicity, violation, ratio, rms, passed)
