"""
Pinning endpoints from corrector series.

alpha(t) = t / r(t) is computed on a geometric t-list and extrapolated with the
model alpha(t) = alpha_inf + c/t fitted on the last three points. The minimal
supersolution series estimates the upper endpoint Q*, the maximal subsolution
series the lower endpoint Q_*.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.cell.corrector import (
    DEFAULT_H,
    CorrectorSettings,
    SlabProblem,
    SolveMode,
    solve_corrector,
)
from src.medium.direction import Direction, rational_directions
from src.medium.medium import PeriodicMedium, rms_mean
from src.utils.errors import EndpointError, PinlabError

logger = logging.getLogger(__name__)

FIT_POINTS = 3
SWEEP_COLUMNS = ["theta", "xi1", "xi2", "q_lower", "q_lower_err", "q_upper", "q_upper_err", "rms_mean", "status"]


@dataclass
class EndpointEstimate:
    """Extrapolated endpoint for one mode."""

    mode: SolveMode
    value: float
    error: float
    slope_coefficient: float
    t_series: List[Dict[str, Any]] = field(default_factory=list)
    subadditivity: Dict[Tuple[float, float], float] = field(default_factory=dict)

    @property
    def max_subadditivity_defect(self) -> float:
        return max(self.subadditivity.values()) if self.subadditivity else float("nan")


@dataclass
class PinningInterval:
    """Estimated pinning interval [Q_*(e), Q*(e)] at one direction."""

    direction: Direction
    q_upper: float
    q_lower: float
    q_upper_err: float
    q_lower_err: float
    t_series: List[Dict[str, Any]] = field(default_factory=list)
    rms_mean: float = float("nan")
    status: str = "ok"

    @property
    def width(self) -> float:
        return self.q_upper - self.q_lower

    def is_consistent(self) -> bool:
        return self.q_lower - self.q_lower_err <= self.q_upper + self.q_upper_err

    def contains_rms(self, slack: float = 0.0) -> bool:
        return (
            self.q_lower - self.q_lower_err - slack
            <= self.rms_mean
            <= self.q_upper + self.q_upper_err + slack
        )

    def to_dict(self) -> Dict[str, Any]:
        d = self.direction.to_dict()
        return {
            "theta": d["theta"],
            "xi1": d["xi1"],
            "xi2": d["xi2"],
            "q_lower": self.q_lower,
            "q_lower_err": self.q_lower_err,
            "q_upper": self.q_upper,
            "q_upper_err": self.q_upper_err,
            "rms_mean": self.rms_mean,
            "status": self.status,
        }


def check_t_list(t_list: Sequence[float]) -> List[float]:
    """Validate an increasing geometric t-list with at least four entries."""
    ts = [float(t) for t in t_list]
    if len(ts) < 4:
        raise ValueError(f"t_list needs at least 4 entries, got {len(ts)}")
    if any(t <= 0 for t in ts) or any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError(f"t_list must be positive and increasing, got {ts}")
    ratios = [b / a for a, b in zip(ts, ts[1:])]
    if max(ratios) - min(ratios) > 1e-6 * ratios[0]:
        raise ValueError(f"t_list must be geometrically spaced, got ratios {ratios}")
    return ts


def subadditivity_defects(t_series: Sequence[Dict[str, Any]]) -> Dict[Tuple[float, float], float]:
    """r(t_i + t_j) - r(t_i) - r(t_j) for every pair whose sum is in the series."""
    r_of = {float(row["t"]): float(row["r"]) for row in t_series}
    ts = sorted(r_of)
    defects: Dict[Tuple[float, float], float] = {}
    for i, ti in enumerate(ts):
        for tj in ts[i:]:
            total = next((t for t in ts if abs(t - (ti + tj)) <= 1e-9 * max(1.0, t)), None)
            if total is not None:
                defects[(ti, tj)] = r_of[total] - r_of[ti] - r_of[tj]
    return defects


def fit_endpoint(ts: Sequence[float], alphas: Sequence[float], floor: float = 0.0) -> Tuple[float, float, float]:
    """
    Least-squares fit alpha = a + c/t on the last FIT_POINTS points.

    Returns:
        (a, c, error) with error the max fit deviation, at least `floor`.
    """
    x = 1.0 / np.asarray(ts[-FIT_POINTS:], dtype=float)
    y = np.asarray(alphas[-FIT_POINTS:], dtype=float)
    design = np.column_stack([np.ones_like(x), x])
    (a, c), *_ = np.linalg.lstsq(design, y, rcond=None)
    deviation = float(np.max(np.abs(design @ np.array([a, c]) - y)))
    return float(a), float(c), max(deviation, floor)


def estimate_endpoint(
    medium: PeriodicMedium,
    direction: Direction,
    t_list: Sequence[float],
    mode=SolveMode.MIN_SUPERSOLUTION,
    tol: float = 1e-3,
    h_max: float = DEFAULT_H,
    settings: Optional[CorrectorSettings] = None,
) -> EndpointEstimate:
    """
    Solve the corrector for every t and extrapolate alpha(t) to t = infinity.

    The error bar is the max deviation of the fit, floored at the solver
    resolution tol * h.

    Raises:
        EndpointError: A solve failed; the partial series is attached.
    """
    ts = check_t_list(t_list)
    mode = SolveMode.parse(mode)
    series: List[Dict[str, Any]] = []
    h = h_max
    for t in ts:
        problem = SlabProblem.build(medium, direction, t, mode, h_max=h_max)
        h = problem.grid.h
        try:
            solution = solve_corrector(problem, tol=tol, settings=settings)
        except PinlabError as e:
            raise EndpointError(
                f"{mode.value} solve failed at t={t} for {direction.label()}: {e}",
                partial_series=series,
                residual_history=getattr(e, "residual_history", None),
            ) from e
        row = solution.summary()
        row["h"] = h
        series.append(row)

    alphas = [row["alpha"] for row in series]
    value, coefficient, error = fit_endpoint(ts, alphas, floor=tol * h)
    estimate = EndpointEstimate(
        mode=mode,
        value=value,
        error=error,
        slope_coefficient=coefficient,
        t_series=series,
        subadditivity=subadditivity_defects(series),
    )
    logger.info(
        "Endpoint %s at %s: %.6f +/- %.2e", mode.value, direction.label(), value, error,
    )
    return estimate


def estimate_interval(
    medium: PeriodicMedium,
    direction: Direction,
    t_list: Sequence[float],
    tol: float = 1e-3,
    h_max: float = DEFAULT_H,
    settings: Optional[CorrectorSettings] = None,
) -> PinningInterval:
    """Both endpoints at one direction."""
    upper = estimate_endpoint(medium, direction, t_list, SolveMode.MIN_SUPERSOLUTION, tol, h_max, settings)
    lower = estimate_endpoint(medium, direction, t_list, SolveMode.MAX_SUBSOLUTION, tol, h_max, settings)
    interval = PinningInterval(
        direction=direction,
        q_upper=upper.value,
        q_lower=lower.value,
        q_upper_err=upper.error,
        q_lower_err=lower.error,
        t_series=upper.t_series + lower.t_series,
        rms_mean=rms_mean(medium),
    )
    if not interval.is_consistent():
        logger.warning(
            "Inverted interval at %s: q_lower=%.6f > q_upper=%.6f beyond error bars",
            direction.label(), interval.q_lower, interval.q_upper,
        )
    return interval


def _interval_task(args) -> PinningInterval:
    medium, direction, t_list, tol, h_max, settings = args
    try:
        return estimate_interval(medium, direction, t_list, tol, h_max, settings)
    except PinlabError as e:
        logger.error("Direction %s failed: %s", direction.label(), e)
        nan = float("nan")
        return PinningInterval(direction, nan, nan, nan, nan, rms_mean=rms_mean(medium), status=type(e).__name__)


def sweep_directions(
    medium: PeriodicMedium,
    xi_max: int,
    t_list: Sequence[float],
    tol: float = 1e-3,
    h_max: float = DEFAULT_H,
    jobs: int = 1,
    settings: Optional[CorrectorSettings] = None,
) -> List[PinningInterval]:
    """
    Pinning intervals at every irreducible xi with |xi|_inf <= xi_max.

    Directions fail independently; a failure is recorded in the row status.
    """
    if xi_max < 2:
        raise ValueError(f"xi_max must be at least 2, got {xi_max}")
    check_t_list(t_list)
    directions = rational_directions(xi_max)
    # Cache before forking so workers inherit it
    rms_mean(medium)
    tasks = [(medium, d, list(t_list), tol, h_max, settings) for d in directions]
    logger.info("Sweeping %d directions (xi_max=%d, jobs=%d)", len(tasks), xi_max, jobs)

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_interval_task, tasks))
    else:
        results = [_interval_task(task) for task in tasks]

    failed = sum(r.status != "ok" for r in results)
    if failed:
        logger.warning("%d of %d directions failed", failed, len(results))
    return sorted(results, key=lambda r: r.direction.angle)


def sweep_frame(intervals: Sequence[PinningInterval]) -> pd.DataFrame:
    """Sweep table with columns theta,xi1,xi2,q_lower,...,status."""
    return pd.DataFrame([i.to_dict() for i in intervals], columns=SWEEP_COLUMNS)


def success_fraction(intervals: Sequence[PinningInterval]) -> float:
    if not intervals:
        return 0.0
    return sum(i.status == "ok" for i in intervals) / len(intervals)
