"""
Energy minimization over height-function configurations.

A configuration is an integer level k_i per column: nodes 0..k_i of column i
are in the positivity set, node k_i + 1 and below are zero. Its field is the
staircase harmonic extension, which minimizes the Dirichlet term for that
positivity set, so every candidate is evaluated at its best field.

Descent starts from the best flat level, tries single-column moves of one
level, then contiguous cyclic block moves, and stops once a full pass moves
nothing. Equal-energy moves toward the data line are accepted so the result is
the smallest minimizer reachable by these moves.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from src.energy.functional import EnergyProblem, energy
from src.grid.harmonic import harmonic_solve
from src.grid.slab import GridField, HeightFunction
from src.utils.errors import InfeasibleBarrierError, SearchSpaceError

logger = logging.getLogger(__name__)

BRUTE_FORCE_CAP = 6 ** 8
TRACE_COLUMNS = ["iter", "energy", "moved_columns"]


@dataclass
class MinimizeSettings:
    """Tunables of the descent."""

    max_sweeps: int = 500
    block_moves: bool = True
    # Relative tolerance under which two energies count as equal
    tie_tol: float = 1e-12


@dataclass
class MinimizeResult:
    """Discrete minimizer with its level configuration and descent record."""

    field: GridField
    levels: np.ndarray
    energy: float
    trace: List[Tuple[int, float, int]] = field(default_factory=list)
    cycled: bool = False
    barrier_active: bool = False
    evaluations: int = 0

    @property
    def boundary(self) -> HeightFunction:
        return HeightFunction(depth_of_levels(self.levels, self.field.grid.h), self.field.grid)

    @property
    def zero_depth(self) -> float:
        """Shallowest depth (k + 1) h where a column's staircase field vanishes."""
        return (int(self.levels.min()) + 1) * self.field.grid.h

    @property
    def alpha(self) -> float:
        """
        Slope t / r of the minimizer, r the shallowest zero depth (k + 1) h.

        The zero depth, not the dual-cell boundary (k + 1/2) h, is the depth
        the flat-level energy t^2/(k+1) + Q^2 (k + 1/2) h balances at, so a
        constant medium gives alpha = Q up to level quantization.
        """
        return float(self.field.values[0, 0]) / self.zero_depth

    def to_dict(self) -> dict:
        return {
            "energy": self.energy,
            "levels": [int(k) for k in self.levels],
            "cycled": self.cycled,
            "barrier_active": self.barrier_active,
            "evaluations": self.evaluations,
        }


def depth_of_levels(levels: np.ndarray, h: float) -> np.ndarray:
    """Boundary depth (k + 1/2) h halfway between the last positive and first zero node."""
    return (np.asarray(levels, dtype=float) + 0.5) * h


def level_field(problem: EnergyProblem, levels: np.ndarray) -> GridField:
    """Staircase harmonic extension for a level configuration."""
    grid = problem.grid
    boundary = HeightFunction(depth_of_levels(levels, grid.h), grid)
    return harmonic_solve(grid, boundary, problem.top_value, stencil="staircase")


def _level_bounds(problem: EnergyProblem) -> Tuple[np.ndarray, np.ndarray]:
    """Per-column admissible level range [lo, hi]."""
    grid = problem.grid
    lo = np.zeros(grid.n_tan, dtype=int)
    hi = np.full(grid.n_tan, grid.n_nrm - 1, dtype=int)
    if problem.lower_barrier is not None:
        positive = problem.lower_barrier.values > 0
        deepest = np.where(positive.any(axis=1), grid.n_rows - 1 - np.argmax(positive[:, ::-1], axis=1), 0)
        lo = np.maximum(lo, deepest)
    if problem.upper_barrier is not None:
        positive = problem.upper_barrier.values > 0
        # first zero row of the upper barrier bounds the positivity set
        first_zero = np.where((~positive).any(axis=1), np.argmax(~positive, axis=1), grid.n_rows)
        hi = np.minimum(hi, first_zero - 1)
    if np.any(lo > hi):
        raise InfeasibleBarrierError("Barrier positivity sets leave no admissible boundary level")
    return lo, hi


def _within_barriers(problem: EnergyProblem, values: np.ndarray) -> bool:
    if problem.lower_barrier is not None and np.any(values < problem.lower_barrier.values - 1e-12):
        return False
    if problem.upper_barrier is not None and np.any(values > problem.upper_barrier.values + 1e-12):
        return False
    return True


class _Evaluator:
    """Memoized energy of level configurations."""

    def __init__(self, problem: EnergyProblem):
        self.problem = problem
        self.cache: Dict[Tuple[int, ...], Tuple[float, Optional[GridField]]] = {}

    def __call__(self, levels: np.ndarray) -> float:
        key = tuple(int(k) for k in levels)
        if key not in self.cache:
            field_ = level_field(self.problem, levels)
            if self.problem.constrained and not _within_barriers(self.problem, field_.values):
                self.cache[key] = (float("inf"), None)
            else:
                self.cache[key] = (energy(field_, self.problem), field_)
        return self.cache[key][0]

    def field(self, levels: np.ndarray) -> GridField:
        self(levels)
        return self.cache[tuple(int(k) for k in levels)][1]


def best_flat_level(problem: EnergyProblem, lo: int = 0, hi: Optional[int] = None) -> int:
    """
    Flat level minimizing the energy. A flat configuration at level k has the
    linear column profile t (1 - j/(k+1)) with Dirichlet term n_tan t^2/(k+1).
    """
    grid = problem.grid
    hi = grid.n_nrm - 1 if hi is None else hi
    weights = problem.positivity_weights().sum(axis=0)
    cumulative = np.cumsum(weights)
    ks = np.arange(lo, hi + 1)
    totals = grid.n_tan * problem.top_value ** 2 / (ks + 1) + cumulative[ks]
    return int(ks[int(np.argmin(totals))])


def _block_moves(n: int):
    """(start, length) of every contiguous cyclic block with 2 <= length <= n."""
    for length in range(2, n + 1):
        starts = range(n) if length < n else range(1)
        for start in starts:
            yield start, length


def minimize(problem: EnergyProblem, settings: Optional[MinimizeSettings] = None) -> MinimizeResult:
    """
    Descent on level configurations; see the module docstring.

    On constrained problems the candidates are limited to fields between the
    barriers, and the result is flagged barrier_active when its gap to a
    barrier falls below h * qmin / 4 off the data row.

    Returns:
        MinimizeResult; `cycled` is set if a configuration repeats.
    """
    settings = settings or MinimizeSettings()
    grid = problem.grid
    n = grid.n_tan
    lo, hi = _level_bounds(problem)
    evaluate = _Evaluator(problem)

    start = best_flat_level(problem, int(lo.max()), int(hi.min())) if lo.max() <= hi.min() else None
    candidates = []
    if start is not None:
        candidates.append(np.full(n, start))
    candidates += [lo.copy(), hi.copy(), (lo + hi) // 2]
    levels = next((c for c in candidates if np.isfinite(evaluate(c))), None)
    if levels is None:
        raise InfeasibleBarrierError("No level configuration lies between the barriers")
    current = evaluate(levels)

    trace: List[Tuple[int, float, int]] = [(0, current, 0)]
    seen = {tuple(levels)}
    cycled = False

    def tolerance(value: float) -> float:
        return settings.tie_tol * max(1.0, abs(value))

    def try_move(columns: np.ndarray, delta: int) -> bool:
        nonlocal levels, current, cycled
        trial = levels.copy()
        trial[columns] += delta
        if np.any(trial[columns] < lo[columns]) or np.any(trial[columns] > hi[columns]):
            return False
        value = evaluate(trial)
        accept = value <= current + tolerance(current) if delta < 0 else value < current - tolerance(current)
        if not accept:
            return False
        key = tuple(int(k) for k in trial)
        if key in seen:
            cycled = True
            return False
        seen.add(key)
        levels, current = trial, value
        return True

    for sweep in range(1, settings.max_sweeps + 1):
        moved = 0
        for i in range(n):
            column = np.array([i])
            if try_move(column, -1) or try_move(column, +1):
                moved += 1
        if moved == 0 and settings.block_moves and n > 1:
            for start_, length in _block_moves(n):
                block = (start_ + np.arange(length)) % n
                if try_move(block, -1) or try_move(block, +1):
                    moved += length
        trace.append((sweep, current, moved))
        if moved == 0 or cycled:
            break
    if cycled:
        logger.warning("Descent revisited a configuration; returning best-so-far")

    field_ = evaluate.field(levels)
    result = MinimizeResult(
        field=field_,
        levels=levels,
        energy=current,
        trace=trace,
        cycled=cycled,
        evaluations=len(evaluate.cache),
    )
    if problem.constrained:
        result.barrier_active = barrier_gap(problem, field_) < grid.h * problem.medium.qmin / 4.0
        if result.barrier_active:
            logger.warning("Minimizer touches a barrier; barriers may not be strict at this resolution")
    logger.debug("Minimize: energy %.10g after %d sweeps, %d evaluations", current, len(trace) - 1, result.evaluations)
    return result


def minimize_constrained(problem: EnergyProblem, settings: Optional[MinimizeSettings] = None) -> MinimizeResult:
    """minimize restricted to fields between the problem's barriers."""
    if not problem.constrained:
        raise ValueError("minimize_constrained needs at least one barrier")
    return minimize(problem, settings)


def barrier_gap(problem: EnergyProblem, field_: GridField) -> float:
    """
    Smallest gap to the barriers off the data row: u - lower where lower > 0,
    upper - u where u > 0.
    """
    values = field_.values[:, 1:]
    gaps = [np.inf]
    if problem.lower_barrier is not None:
        lower = problem.lower_barrier.values[:, 1:]
        mask = lower > 0
        if mask.any():
            gaps.append(float(np.min(values[mask] - lower[mask])))
    if problem.upper_barrier is not None:
        upper = problem.upper_barrier.values[:, 1:]
        mask = values > 0
        if mask.any():
            gaps.append(float(np.min(upper[mask] - values[mask])))
    return float(min(gaps))


def brute_force_minimize(
    problem: EnergyProblem,
    levels: Optional[Tuple[int, int]] = None,
    cap: int = BRUTE_FORCE_CAP,
) -> MinimizeResult:
    """
    Exhaustive minimum over every level configuration.

    Ties are broken by the smaller positivity set, then lexicographically.

    Args:
        problem: Energy problem (barriers respected).
        levels: Inclusive level range (lo, hi) shared by all columns; the full
            admissible range by default.
        cap: Largest number of configurations to enumerate.

    Raises:
        SearchSpaceError: If the search space exceeds the cap.
    """
    grid = problem.grid
    lo_b, hi_b = _level_bounds(problem)
    lo, hi = levels if levels is not None else (int(lo_b.min()), int(hi_b.max()))
    if lo < 0 or hi > grid.n_nrm - 1 or lo > hi:
        raise ValueError(f"Level range must lie in [0, {grid.n_nrm - 1}], got ({lo}, {hi})")
    size = (hi - lo + 1) ** grid.n_tan
    if size > cap:
        raise SearchSpaceError(f"Search space of {size} configurations exceeds the cap {cap}")

    evaluate = _Evaluator(problem)
    best_key = None
    best_value = float("inf")
    for combo in itertools.product(range(lo, hi + 1), repeat=grid.n_tan):
        config = np.array(combo)
        if np.any(config < lo_b) or np.any(config > hi_b):
            continue
        value = evaluate(config)
        if not np.isfinite(value):
            continue
        tol = 1e-12 * max(1.0, abs(best_value)) if np.isfinite(best_value) else 0.0
        order = (sum(combo), combo)
        if best_key is None or value < best_value - tol or (abs(value - best_value) <= tol and order < best_key):
            best_key, best_value = order, value
        # drop fields to keep memory flat
        evaluate.cache[combo] = (value, None)
    if best_key is None:
        raise InfeasibleBarrierError("No level configuration lies between the barriers")
    best_levels = np.array(best_key[1])
    return MinimizeResult(
        field=level_field(problem, best_levels),
        levels=best_levels,
        energy=best_value,
        trace=[(0, best_value, 0)],
        evaluations=len(evaluate.cache),
    )


def energy_trace_frame(result: MinimizeResult) -> pd.DataFrame:
    """Descent trace with columns iter,energy,moved_columns."""
    return pd.DataFrame(result.trace, columns=TRACE_COLUMNS)
