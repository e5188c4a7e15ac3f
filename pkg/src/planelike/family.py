"""
Translation-generated families of plane-like solutions.

Members are corrector solutions whose data line is shifted by sigma (a
multiple of h) across one normal period 1/|xi|. Each member's asymptotic
plane vanishes at x.p = sigma - s/alpha; these zero positions, taken modulo
the period, are the family offsets. Gaps between consecutive offsets wider
than gap_tol are reported.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.cell.corrector import DEFAULT_H, CorrectorSettings, SlabProblem, SolveMode, solve_corrector
from src.medium.direction import Direction
from src.medium.medium import PeriodicMedium
from src.planelike.offsets import PlaneLikeSolution, extract_offset
from src.utils.errors import FamilyOrderError

logger = logging.getLogger(__name__)

FAMILY_COLUMNS = ["s", "offset_residual", "gap_to_next"]
DEFAULT_DEPTH = 4.0


@dataclass
class SweepFamily:
    """Sorted offsets of a monotone family in one normal period."""

    direction: Direction
    slope: float
    period: float
    offsets: List[float] = field(default_factory=list)
    solutions: List[PlaneLikeSolution] = field(default_factory=list)
    gaps: List[Tuple[float, float]] = field(default_factory=list)
    order_defect: float = 0.0

    def gap_to_next(self) -> List[float]:
        """Cyclic spacing from each offset to the next."""
        if not self.offsets:
            return []
        nxt = self.offsets[1:] + [self.offsets[0] + self.period]
        return [b - a for a, b in zip(self.offsets, nxt)]


def _shifts(period: float, h: float, n_translates: int) -> List[float]:
    steps = int(round(period / h))
    picks = sorted({int(round(k * steps / n_translates)) % steps for k in range(n_translates)})
    return [k * h for k in picks]


def _member_task(args) -> PlaneLikeSolution:
    medium, direction, t, mode, h_max, shift, tol, settings = args
    problem = SlabProblem.build(medium, direction, t, mode, h_max=h_max, shift=shift)
    solution = solve_corrector(problem, tol=tol, settings=settings)
    return extract_offset(solution, direction)


def boundary_order_defect(members: Sequence[PlaneLikeSolution]) -> float:
    """
    Largest amount by which a member with a lower zero position has its free
    boundary above that of a member with a higher one (physical x.p, per column).
    """
    ordered = sorted(members, key=lambda m: m.zero_position)
    heights = [m.cell_solution.grid.shift - m.cell_solution.boundary.g for m in ordered]
    worst = 0.0
    for i in range(len(heights)):
        for j in range(i + 1, len(heights)):
            worst = max(worst, float(np.max(heights[i] - heights[j])))
    return worst


def build_sweep_family(
    medium: PeriodicMedium,
    xi: Tuple[int, int],
    slope: Optional[float] = None,
    n_translates: int = 16,
    gap_tol: Optional[float] = None,
    depth: float = DEFAULT_DEPTH,
    mode=SolveMode.MIN_SUPERSOLUTION,
    tol: float = 1e-3,
    h_max: float = DEFAULT_H,
    jobs: int = 1,
    settings: Optional[CorrectorSettings] = None,
) -> SweepFamily:
    """
    Solve the corrector with datum t = slope * depth at n_translates data-line
    shifts over one normal period and collect the offsets.

    Args:
        medium: The medium.
        xi: Irreducible lattice vector of the direction.
        slope: Target slope; defaults to <Q^2>^{1/2}.
        n_translates: Number of data-line shifts sampled.
        gap_tol: Smallest reported gap; defaults to the larger of 2h and
            1.5 sampling spacings.
        depth: Nominal distance from the data line to the free boundary.

    Raises:
        FamilyOrderError: If the members are not ordered beyond 2h slack.
    """
    direction = Direction.from_lattice(xi)
    if n_translates < 1:
        raise ValueError(f"n_translates must be positive, got {n_translates}")
    slope = medium.rms if slope is None else float(slope)
    t = slope * depth
    period = 1.0 / direction.lattice_norm
    h = SlabProblem.build(medium, direction, t, mode, h_max=h_max).grid.h
    if gap_tol is None:
        gap_tol = max(2.0 * h, 1.5 * period / n_translates)
    shifts = _shifts(period, h, n_translates)
    tasks = [(medium, direction, t, SolveMode.parse(mode), h_max, s, tol, settings) for s in shifts]
    logger.info("Family at %s: %d translates, t=%.4g", direction.label(), len(tasks), t)

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            members = list(pool.map(_member_task, tasks))
    else:
        members = [_member_task(task) for task in tasks]

    defect = boundary_order_defect(members)
    if defect > 2.0 * h:
        raise FamilyOrderError(f"family not monotone: boundary order violated by {defect:.4g} > 2h")

    keyed = sorted(((m.zero_position % period, m) for m in members), key=lambda item: item[0])
    offsets: List[float] = []
    solutions: List[PlaneLikeSolution] = []
    for value, member in keyed:
        if offsets and value - offsets[-1] < h:
            continue
        offsets.append(float(value))
        solutions.append(member)
    if len(offsets) > 1 and offsets[0] + period - offsets[-1] < h:
        offsets.pop()
        solutions.pop()

    family = SweepFamily(
        direction=direction,
        slope=float(np.mean([m.slope for m in members])),
        period=period,
        offsets=offsets,
        solutions=solutions,
        order_defect=defect,
    )
    family.gaps = [
        (a, a + gap) for a, gap in zip(family.offsets, family.gap_to_next()) if gap > gap_tol
    ]
    logger.info("Family at %s: %d distinct offsets, %d gaps", direction.label(), len(offsets), len(family.gaps))
    return family


def offset_family_frame(family: SweepFamily) -> pd.DataFrame:
    """Family table with columns s,offset_residual,gap_to_next."""
    rows = [
        {"s": s, "offset_residual": m.offset_residual, "gap_to_next": gap}
        for s, m, gap in zip(family.offsets, family.solutions, family.gap_to_next())
    ]
    return pd.DataFrame(rows, columns=FAMILY_COLUMNS)
