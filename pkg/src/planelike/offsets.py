"""
Boundary-layer offsets of plane-like solutions.

Above the free boundary a tangentially periodic discrete harmonic field has
row means that are exactly affine in the depth, so the asymptotic plane
(alpha * z + s)^+ with z = -depth is fitted on the fully positive rows. The
remaining deviation lives in the nonzero tangential modes and decays
exponentially with the distance to the boundary.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.cell.corrector import CellSolution
from src.medium.direction import Direction
from src.utils.errors import NoBoundaryLayerError

logger = logging.getLogger(__name__)

# Deviations below this multiple of t count as an exact plane
EXACT_TOL = 1e-10
BAND_WIDTH = 1.0


@dataclass
class PlaneLikeSolution:
    """A corrector solution with its asymptotic plane in the data-line frame."""

    cell_solution: CellSolution
    slope: float
    offset: float
    offset_residual: float
    decay_rate: float = math.inf

    @property
    def decay_fitted(self) -> bool:
        return not math.isnan(self.decay_rate)

    @property
    def zero_position(self) -> float:
        """Physical x.p where the asymptotic plane vanishes."""
        return self.cell_solution.grid.shift - self.offset / self.slope

    def plane(self) -> np.ndarray:
        """(slope * z + offset)^+ on the solution grid."""
        grid = self.cell_solution.grid
        z = -grid.depths
        return np.broadcast_to(np.maximum(self.slope * z + self.offset, 0.0), grid.shape).copy()

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "offset": self.offset,
            "offset_residual": self.offset_residual,
            "decay_rate": self.decay_rate,
            "zero_position": self.zero_position,
        }


def fully_positive_rows(solution: CellSolution) -> int:
    """Number of leading rows that are positive in every column and have a positive row below."""
    positive = np.all(solution.field.values > 0, axis=0)
    count = int(np.argmin(positive)) if not positive.all() else positive.size
    return max(count - 1, 0)


def band_deviation(deviation: np.ndarray, distance: np.ndarray, width: float = BAND_WIDTH) -> Tuple[np.ndarray, np.ndarray]:
    """Sup of per-row deviations over bands [k w, (k+1) w) of distance to the boundary."""
    bands = np.floor(distance / width).astype(int)
    ids = np.unique(bands)
    sups = np.array([deviation[bands == b].max() for b in ids])
    return ids * width + width / 2.0, sups


def extract_offset(solution: CellSolution, direction: Optional[Direction] = None) -> PlaneLikeSolution:
    """
    Fit the asymptotic plane of a corrector solution.

    The slope and offset come from a linear fit of row means against
    z = -depth; the decay rate from a log-linear fit of the band-wise sup
    deviation against the distance to the shallowest boundary point.

    Returns:
        PlaneLikeSolution; decay_rate is inf when the field is an exact plane
        and NaN when fewer than two bands deviate from it (not fitted).

    Raises:
        NoBoundaryLayerError: If the fitted decay rate is not positive.
    """
    direction = direction or solution.grid.direction
    if not direction.is_rational:
        raise ValueError("extract_offset needs a tangentially periodic (rational) solution")
    grid = solution.grid
    rows = fully_positive_rows(solution)
    if rows < 2:
        raise ValueError(f"Need at least two fully positive rows above the boundary, found {rows}")
    values = solution.field.values[:, :rows]
    z = -grid.depths[:rows]
    fitted_slope, offset = np.polyfit(z, values.mean(axis=0), 1)
    slope = float(fitted_slope)
    plane = slope * z + offset
    deviation = np.max(np.abs(values - plane[None, :]), axis=0)
    scale = max(abs(solution.t), 1.0)
    distance = solution.r - grid.depths[:rows]

    centres, sups = band_deviation(deviation, distance)
    far_residual = float(sups[-1])
    if np.all(sups <= EXACT_TOL * scale):
        return PlaneLikeSolution(solution, slope, float(offset), far_residual, math.inf)

    usable = sups > EXACT_TOL * scale
    if usable.sum() < 2:
        # a single nonzero band cannot fix a rate
        rate = math.nan
        logger.warning("Boundary-layer decay not fitted: %d band(s) above the exact-plane level", int(usable.sum()))
    else:
        rate = -float(np.polyfit(centres[usable], np.log(sups[usable]), 1)[0])
        if rate <= 0:
            raise NoBoundaryLayerError(
                f"no boundary layer: deviation from the asymptotic plane does not decay (rate {rate:.3g})"
            )
    logger.debug("Offset %.6f slope %.6f residual %.2e rate %.3g", offset, slope, far_residual, rate)
    return PlaneLikeSolution(solution, slope, float(offset), far_residual, rate)
