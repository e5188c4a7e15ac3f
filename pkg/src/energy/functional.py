"""
Discrete Alt-Caffarelli energy on a slab grid.

E(v) = sum over grid edges of (forward difference)^2
     + sum over nodes of Q(x/epsilon)^2 * 1{v > 0} * w_j * h^2

Tangential edges wrap periodically. The positivity weight w_j is the dual-cell
fraction of node row j: 1/2 on the data row and on the last row, 1 elsewhere,
so a column positive on rows 0..k has positivity area (k + 1/2) * h^2.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.grid.slab import GridField, SlabGrid
from src.medium.medium import PeriodicMedium, rms_mean
from src.utils.errors import ConfigurationError, InfeasibleBarrierError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnergyProblem:
    """Energy minimization data, optionally constrained between two barriers."""

    grid: SlabGrid
    medium: PeriodicMedium
    top_value: float
    lower_barrier: Optional[GridField] = None
    upper_barrier: Optional[GridField] = None
    epsilon: float = 1.0

    def __post_init__(self):
        if self.top_value <= 0:
            raise ConfigurationError(f"top_value must be positive, got {self.top_value}")
        if self.epsilon <= 0:
            raise ConfigurationError(f"epsilon must be positive, got {self.epsilon}")
        if self.grid.h > self.epsilon / 10.0 + 1e-15:
            raise ConfigurationError(
                f"Grid spacing {self.grid.h} must not exceed epsilon/10 = {self.epsilon / 10.0}"
            )
        for barrier in (self.lower_barrier, self.upper_barrier):
            if barrier is not None and barrier.values.shape != self.grid.shape:
                raise ConfigurationError(f"Barrier shape {barrier.values.shape} does not match grid {self.grid.shape}")
        if self.lower_barrier is not None and self.upper_barrier is not None:
            lower = self.lower_barrier.values
            upper = self.upper_barrier.values
            crossing = (lower > upper) | ((lower > 0) & (lower >= upper))
            if np.any(crossing):
                i, j = np.argwhere(crossing)[0]
                raise InfeasibleBarrierError(
                    f"Barriers are not strictly ordered on the lower positivity set (first at node ({i}, {j}))"
                )

    @property
    def constrained(self) -> bool:
        return self.lower_barrier is not None or self.upper_barrier is not None

    def coefficient_squared(self) -> np.ndarray:
        """Q(x/epsilon)^2 at every node."""
        return self.medium(self.grid.points() / self.epsilon) ** 2

    def positivity_weights(self) -> np.ndarray:
        """Q^2 * w_j * h^2 per node."""
        weights = np.ones(self.grid.n_rows)
        weights[0] = 0.5
        weights[-1] = 0.5
        return self.coefficient_squared() * weights[None, :] * self.grid.h ** 2


def dirichlet_energy(values: np.ndarray) -> float:
    """Sum of squared forward differences, tangentially periodic."""
    tangential = np.roll(values, -1, axis=0) - values
    normal = np.diff(values, axis=1)
    return math.fsum((tangential ** 2).ravel()) + math.fsum((normal ** 2).ravel())


def energy(field: GridField, problem: EnergyProblem) -> float:
    """Discrete energy of a field on the problem grid."""
    if field.values.shape != problem.grid.shape:
        raise ValueError(f"Field shape {field.values.shape} does not match grid {problem.grid.shape}")
    positive = field.values > 0
    indicator = math.fsum(problem.positivity_weights()[positive])
    return dirichlet_energy(field.values) + indicator


def energy_per_tangent(field: GridField, problem: EnergyProblem) -> float:
    """Energy per unit tangential length."""
    return energy(field, problem) / problem.grid.period_len


def crossing_edges(u: np.ndarray, v: np.ndarray) -> int:
    """Number of grid edges whose endpoints are strictly ordered in opposite ways."""
    d = u - v
    tangential = d * np.roll(d, -1, axis=0) < 0
    normal = d[:, :-1] * d[:, 1:] < 0
    return int(tangential.sum() + normal.sum())


def lattice_defect(u: GridField, v: GridField, problem: EnergyProblem) -> float:
    """
    E(u) + E(v) - E(u min v) - E(u max v).

    Nonnegative for the discrete energy; zero when no edge is crossed.
    """
    low = u.with_values(np.minimum(u.values, v.values))
    high = u.with_values(np.maximum(u.values, v.values))
    return energy(u, problem) + energy(v, problem) - energy(low, problem) - energy(high, problem)


def plane_energy_per_period(alpha: float, depth: float, medium: PeriodicMedium) -> float:
    """
    Energy per unit tangent of a plane solution of slope alpha over depth L:
    alpha^2 L + <Q^2> L. Its minimum over alpha at fixed t = alpha L sits at
    alpha = <Q^2>^{1/2}.
    """
    if alpha <= 0 or depth <= 0:
        raise ValueError(f"alpha and depth must be positive, got ({alpha}, {depth})")
    return alpha ** 2 * depth + rms_mean(medium) ** 2 * depth


def optimal_plane_slope(medium: PeriodicMedium) -> float:
    return rms_mean(medium)
