"""
Exception hierarchy for pinlab.

Every error raised on purpose by the library derives from PinlabError so the
CLI can map failures onto exit codes:
- ConfigurationError and its subclasses -> 1
- SolverError and its subclasses -> 2
- ValidationError -> 3
"""

from typing import Any, Dict, List, Optional, Sequence, Tuple


class PinlabError(Exception):
    """Base exception for pinlab."""
    pass


class ConfigurationError(PinlabError):
    """Raised when a configuration value or precondition is invalid."""
    pass


class InfeasibleBarrierError(ConfigurationError):
    """Raised when constrained-minimization barriers are not strictly ordered."""
    pass


class SearchSpaceError(ConfigurationError):
    """Raised when an exhaustive search would exceed its configuration cap."""
    pass


class MediumError(ConfigurationError):
    """Raised when a medium violates a construction invariant."""

    def __init__(self, message: str, location: Optional[Tuple[float, ...]] = None):
        super().__init__(message)
        self.location = location


class SolverError(PinlabError):
    """Base class for numerical solver failures."""

    def __init__(self, message: str, residual_history: Optional[List[float]] = None):
        super().__init__(message)
        self.residual_history = list(residual_history or [])


class QuadratureError(SolverError):
    """Raised when adaptive quadrature fails to converge."""

    def __init__(self, message: str, estimates: Sequence[float] = ()):
        super().__init__(message)
        self.estimates = list(estimates)


class ConvergenceError(SolverError):
    """Raised when an iteration hits its cap without meeting the tolerance."""
    pass


class GraphAssumptionError(ConvergenceError):
    """Raised when the free boundary cannot be followed as a height function."""
    pass


class ObstacleDataError(SolverError):
    """Raised when a front collapses onto the obstacle."""
    pass


class NoBoundaryLayerError(SolverError):
    """Raised when the deviation from the asymptotic plane does not decay."""
    pass


class FamilyOrderError(SolverError):
    """Raised when a translation family is not pointwise ordered."""
    pass


class BendingError(SolverError):
    """Raised when a bending profile or bent field fails its checks."""

    def __init__(
        self,
        message: str,
        worst_node: Optional[Tuple[int, int]] = None,
        residual_history: Optional[List[float]] = None,
    ):
        super().__init__(message, residual_history)
        self.worst_node = worst_node


class EndpointError(SolverError):
    """Raised when a solve inside an endpoint estimate fails."""

    def __init__(
        self,
        message: str,
        partial_series: Optional[List[Dict[str, Any]]] = None,
        residual_history: Optional[List[float]] = None,
    ):
        super().__init__(message, residual_history)
        self.partial_series = list(partial_series or [])


class ValidationError(PinlabError):
    """Raised when an invariant suite fails."""
    pass


EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_VALIDATION = 3


def exit_code_for(error: BaseException) -> int:
    """Map an exception onto the CLI exit code."""
    if isinstance(error, ValidationError):
        return EXIT_VALIDATION
    if isinstance(error, SolverError):
        return EXIT_SOLVER
    if isinstance(error, (ConfigurationError, FileNotFoundError)):
        return EXIT_CONFIG
    return EXIT_SOLVER
