"""
Corrector problem, pinning endpoints and structural diagnostics.
"""

from .corrector import (
    SolveMode,
    CorrectorSettings,
    SlabProblem,
    CellSolution,
    solve_corrector,
    boundary_coefficient,
)
from .oracle import laminar_oracle
from .endpoint import (
    EndpointEstimate,
    PinningInterval,
    check_t_list,
    fit_endpoint,
    estimate_endpoint,
    estimate_interval,
    sweep_directions,
    sweep_frame,
    subadditivity_defects,
    success_fraction,
    SWEEP_COLUMNS,
)
from .diagnostics import (
    NormalBoundReport,
    birkhoff_check,
    verify_normal_bound,
    mode_ordering_defect,
)

__all__ = [
    # Corrector
    "SolveMode",
    "CorrectorSettings",
    "SlabProblem",
    "CellSolution",
    "solve_corrector",
    "boundary_coefficient",
    "laminar_oracle",
    # Endpoints
    "EndpointEstimate",
    "PinningInterval",
    "check_t_list",
    "fit_endpoint",
    "estimate_endpoint",
    "estimate_interval",
    "sweep_directions",
    "sweep_frame",
    "subadditivity_defects",
    "success_fraction",
    "SWEEP_COLUMNS",
    # Diagnostics
    "NormalBoundReport",
    "birkhoff_check",
    "verify_normal_bound",
    "mode_ordering_defect",
]
