"""
Periodic media: coefficient fields Q(x), directions, and statistics.
"""

from .direction import Direction, rational_directions
from .fields import SineProfile
from .medium import (
    MediumKind,
    PeriodicMedium,
    make_constant,
    make_laminar,
    make_bump_lattice,
    medium_from_samples,
    load_custom_medium,
    write_custom_medium,
    rms_mean,
    ball_extrema,
    ball_field,
)
from .checks import MediumCheckReport, check_medium

__all__ = [
    # Directions
    "Direction",
    "rational_directions",
    # Media
    "MediumKind",
    "PeriodicMedium",
    "SineProfile",
    "make_constant",
    "make_laminar",
    "make_bump_lattice",
    "medium_from_samples",
    "load_custom_medium",
    "write_custom_medium",
    # Statistics
    "rms_mean",
    "ball_extrema",
    "ball_field",
    "MediumCheckReport",
    "check_medium",
]
