"""
Plane-like solutions: boundary-layer offsets, translation families, bending.
"""

from .offsets import (
    PlaneLikeSolution,
    extract_offset,
    fully_positive_rows,
    band_deviation,
)
from .family import (
    SweepFamily,
    build_sweep_family,
    boundary_order_defect,
    offset_family_frame,
    FAMILY_COLUMNS,
)
from .bending import (
    BendingProfile,
    BendResult,
    plateau,
    strip_harmonic,
    make_bending_profile,
    bend,
    lift_bracket,
    convexity_defect,
)

__all__ = [
    # Offsets
    "PlaneLikeSolution",
    "extract_offset",
    "fully_positive_rows",
    "band_deviation",
    # Families
    "SweepFamily",
    "build_sweep_family",
    "boundary_order_defect",
    "offset_family_frame",
    "FAMILY_COLUMNS",
    # Bending
    "BendingProfile",
    "BendResult",
    "plateau",
    "strip_harmonic",
    "make_bending_profile",
    "bend",
    "lift_bracket",
    "convexity_defect",
]
