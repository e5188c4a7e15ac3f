"""
Discrete Alt-Caffarelli energy and its minimization.
"""

from .functional import (
    EnergyProblem,
    energy,
    energy_per_tangent,
    dirichlet_energy,
    crossing_edges,
    lattice_defect,
    plane_energy_per_period,
    optimal_plane_slope,
)
from .minimize import (
    MinimizeSettings,
    MinimizeResult,
    minimize,
    minimize_constrained,
    brute_force_minimize,
    best_flat_level,
    barrier_gap,
    level_field,
    depth_of_levels,
    energy_trace_frame,
    BRUTE_FORCE_CAP,
    TRACE_COLUMNS,
)

__all__ = [
    # Functional
    "EnergyProblem",
    "energy",
    "energy_per_tangent",
    "dirichlet_energy",
    "crossing_edges",
    "lattice_defect",
    "plane_energy_per_period",
    "optimal_plane_slope",
    # Minimization
    "MinimizeSettings",
    "MinimizeResult",
    "minimize",
    "minimize_constrained",
    "brute_force_minimize",
    "best_flat_level",
    "barrier_gap",
    "level_field",
    "depth_of_levels",
    "energy_trace_frame",
    "BRUTE_FORCE_CAP",
    "TRACE_COLUMNS",
]
