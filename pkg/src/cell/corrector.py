"""
Slab corrector problem: u_t harmonic in {-height < x.p < 0} below the data
line u = t, with free boundary condition |grad u| = Q on the graph s = g(tau).

The boundary is advanced by a damped quasi-Newton fixed point on the height
function. The minimal supersolution is approached from a strict subsolution
front that only moves away from the data line; the maximal subsolution from a
strict supersolution front that only moves towards it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np

from src.grid.harmonic import FrontResponse, boundary_gradient, harmonic_solve
from src.grid.slab import GridField, HeightFunction, SlabGrid
from src.medium.direction import Direction
from src.medium.medium import PeriodicMedium
from src.utils.errors import ConvergenceError, GraphAssumptionError, SolverError

logger = logging.getLogger(__name__)

DEFAULT_H = 0.05
HEIGHT_FACTOR = 2.0
PATH_SAMPLES = 16
FLIP_FRACTION = 0.25
FLIP_PATIENCE = 3
# Relative gradient overshoot that counts as a reversal of a moved column
FLIP_DEMAND = 0.05


class SolveMode(Enum):
    """Perron-extremal solution being computed."""
    MIN_SUPERSOLUTION = "min_supersolution"
    MAX_SUBSOLUTION = "max_subsolution"

    @classmethod
    def parse(cls, value) -> "SolveMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value))
        except ValueError:
            available = ", ".join(m.value for m in cls)
            raise ValueError(f"Unknown mode: {value}. Available: {available}") from None


@dataclass
class CorrectorSettings:
    """Tunables of the free-boundary fixed point."""

    damping: float = 0.5
    min_damping: float = 1.0 / 32.0
    # Largest boundary move per iteration, in grid spacings
    max_step_cells: float = 4.0
    max_iterations: int = 5000


@dataclass(frozen=True)
class SlabProblem:
    """Corrector problem with datum t on a slab grid."""

    medium: PeriodicMedium
    direction: Direction
    t: float
    grid: SlabGrid
    mode: SolveMode = SolveMode.MIN_SUPERSOLUTION

    def __post_init__(self):
        if self.t <= 0:
            raise ValueError(f"t must be positive, got {self.t}")
        need = HEIGHT_FACTOR * self.t / self.medium.qmin
        if self.grid.height < need - 1e-9:
            raise ValueError(f"Slab height {self.grid.height} is below 2*t/qmin = {need}")

    @classmethod
    def build(
        cls,
        medium: PeriodicMedium,
        direction: Direction,
        t: float,
        mode=SolveMode.MIN_SUPERSOLUTION,
        h_max: float = DEFAULT_H,
        shift: float = 0.0,
        period_len: Optional[float] = None,
    ) -> "SlabProblem":
        """Problem on the smallest admissible slab for datum t; period_len widens it tangentially."""
        height = HEIGHT_FACTOR * t / medium.qmin + 2.0 * h_max
        grid = SlabGrid.build(direction, height, h_max, period_len=period_len, shift=shift)
        return cls(medium, direction, float(t), grid, SolveMode.parse(mode))


@dataclass
class CellSolution:
    """Discrete plane-like solution of the slab corrector problem."""

    field: GridField
    boundary: HeightFunction
    t: float
    mode: SolveMode
    r: float
    alpha: float
    width_osc: float
    fb_residual: float
    fb_violation: float
    iterations: int
    converged: bool = True
    damping: float = 0.5
    residual_history: List[float] = field(default_factory=list)
    medium: Optional[PeriodicMedium] = None

    @property
    def grid(self) -> SlabGrid:
        return self.field.grid

    def summary(self) -> Dict[str, Any]:
        return {
            "t": self.t,
            "mode": self.mode.value,
            "r": self.r,
            "alpha": self.alpha,
            "width_osc": self.width_osc,
            "fb_residual": self.fb_residual,
            "fb_violation": self.fb_violation,
            "iterations": self.iterations,
        }


def boundary_coefficient(grid: SlabGrid, medium: PeriodicMedium, depths: np.ndarray) -> np.ndarray:
    """Q at the boundary points (tau_i, depths[i, ...])."""
    taus = grid.taus.reshape((-1,) + (1,) * (np.ndim(depths) - 1))
    return medium(grid.to_physical(np.broadcast_to(taus, np.shape(depths)), depths))


def reversed_columns(moved: np.ndarray, gradient: np.ndarray, q_before: np.ndarray, super_mode: bool) -> np.ndarray:
    """
    Moved columns whose gradient now overshoots, by more than FLIP_DEMAND, the
    coefficient they moved against; a landing on a rise of Q is not a reversal.
    """
    overshoot = (gradient - q_before) / np.maximum(gradient, 1e-12)
    return moved & ((overshoot < -FLIP_DEMAND) if super_mode else (overshoot > FLIP_DEMAND))


def _path_limited(
    grid: SlabGrid,
    medium: PeriodicMedium,
    g: np.ndarray,
    gradient: np.ndarray,
    step: np.ndarray,
    super_mode: bool,
) -> np.ndarray:
    """
    Shorten each step to the first sampled position where the linear-profile
    prediction |grad u| * g / g' already satisfies the mode's inequality.
    """
    moving = step != 0
    if not np.any(moving):
        return step
    fractions = np.arange(1, PATH_SAMPLES + 1) / PATH_SAMPLES
    candidates = g[:, None] + step[:, None] * fractions[None, :]
    q = boundary_coefficient(grid, medium, candidates)
    predicted = gradient[:, None] * g[:, None] / candidates
    hit = predicted <= q if super_mode else predicted >= q
    first = np.argmax(hit, axis=1)
    any_hit = hit.any(axis=1)
    limited = np.where(any_hit, step * fractions[first], step)
    return np.where(moving, limited, step)


def _initial_depth(problem: SlabProblem) -> float:
    grid = problem.grid
    h = grid.h
    if problem.mode is SolveMode.MIN_SUPERSOLUTION:
        return max(problem.t / problem.medium.qmax - h, 2.0 * h)
    return min(problem.t / problem.medium.qmin + h, grid.height - h)


def solve_corrector(
    problem: SlabProblem,
    tol: float = 1e-3,
    settings: Optional[CorrectorSettings] = None,
) -> CellSolution:
    """
    Solve the slab corrector problem by the monotone free-boundary fixed point.

    Each iteration solves the cut-cell harmonic problem for the current
    boundary and measures |grad u| at every column crossing. Columns that still
    violate the mode's inequality take a damped Newton move against the
    linearized boundary response (FrontResponse), with every other column
    held fixed; on a flat front this is the step omega * g * (|grad u| - Q) / |grad u|
    of the linear profile u = t (1 - s/g). Moves are capped at
    max_step_cells * h and cut at the first sampled position that satisfies
    the free boundary inequality.

    Args:
        problem: The slab problem.
        tol: Stop once every column moves less than tol * h.
        settings: Fixed-point tunables.

    Returns:
        CellSolution with r = min g and alpha = t / r.

    Raises:
        ConvergenceError: Iteration cap reached; carries the residual history.
        GraphAssumptionError: Persistent oscillation after damping bottomed out.
        SolverError: The front hit the slab wall or the data line.
    """
    settings = settings or CorrectorSettings()
    grid, medium, t = problem.grid, problem.medium, problem.t
    h = grid.h
    super_mode = problem.mode is SolveMode.MIN_SUPERSOLUTION
    if h > t / (20.0 * medium.qmax):
        logger.debug("Grid spacing %.4f coarser than t/(20*qmax) = %.4f", h, t / (20.0 * medium.qmax))

    g = np.full(grid.n_tan, _initial_depth(problem))
    omega = settings.damping
    max_step = settings.max_step_cells * h
    history: List[float] = []
    moved = np.zeros(grid.n_tan, dtype=bool)
    q_before = np.zeros(grid.n_tan)
    flip_streak = 0

    for iteration in range(1, settings.max_iterations + 1):
        boundary = HeightFunction(g, grid)
        field_ = harmonic_solve(grid, boundary, t)
        gradient, available = boundary_gradient(field_, boundary)
        gradient = np.where(available, gradient, t / g)
        q = boundary_coefficient(grid, medium, g)
        mismatch = gradient - q
        history.append(float(np.max(np.abs(mismatch))))

        demand = mismatch / np.maximum(gradient, 1e-12)
        active = demand > 0 if super_mode else demand < 0
        response = FrontResponse.flat(grid.n_tan, h, float(g.mean()), h)
        raw = omega * response.newton_step(demand, active)
        if super_mode:
            step = np.clip(raw, 0.0, max_step)
        else:
            step = np.clip(raw, -max_step, 0.0)
        step = _path_limited(grid, medium, g, gradient, step, super_mode)

        reversed_ = reversed_columns(moved, gradient, q_before, super_mode)
        if np.any(moved):
            flip_streak = flip_streak + 1 if reversed_.sum() > FLIP_FRACTION * moved.sum() else 0
            if flip_streak >= FLIP_PATIENCE:
                omega /= 2.0
                flip_streak = 0
                logger.warning("Boundary oscillating at iteration %d; damping halved to %.4f", iteration, omega)
                if omega < settings.min_damping:
                    raise GraphAssumptionError(
                        "graph-assumption-violated: boundary keeps oscillating after damping",
                        residual_history=history,
                    )
        moved = np.abs(step) >= tol * h
        q_before = q

        if np.max(np.abs(step)) < tol * h:
            break

        g = g + step
        if super_mode and np.any(g >= grid.height - h):
            raise SolverError("Front reached the slab wall; increase the slab height", residual_history=history)
        if not super_mode and np.any(g <= h):
            raise SolverError("Front reached the data line", residual_history=history)
    else:
        raise ConvergenceError(
            f"Corrector did not converge within {settings.max_iterations} iterations",
            residual_history=history,
        )

    if super_mode:
        violation = float(np.max(np.maximum(mismatch, 0.0)))
    else:
        violation = float(np.max(np.maximum(-mismatch, 0.0)))
    r = boundary.r
    solution = CellSolution(
        field=field_,
        boundary=boundary,
        t=t,
        mode=problem.mode,
        r=r,
        alpha=t / r,
        width_osc=boundary.width,
        fb_residual=float(np.max(np.abs(mismatch))),
        fb_violation=violation,
        iterations=iteration,
        damping=omega,
        residual_history=history,
        medium=medium,
    )
    logger.debug(
        "Corrector %s %s t=%.3g: r=%.6f alpha=%.6f width=%.4f after %d iterations",
        problem.mode.value, problem.direction.label(), t, r, solution.alpha, solution.width_osc, iteration,
    )
    return solution
