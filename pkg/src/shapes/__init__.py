"""
Limit shapes of obstacle problems: geometry helpers and the radial front solver.
"""

from .geometry import (
    Facet,
    make_polygon,
    square,
    regular_polygon,
    rounded_square,
    polygon_vertices,
    support_radius,
    resample,
    perimeter,
    hausdorff,
    convexity_violations,
    detect_facets,
    facet_frame,
    facet_coverage,
    FACET_COLUMNS,
)
from .obstacle import (
    ObstacleProblem,
    ObstacleSettings,
    CartesianField,
    LimitShapeResult,
    solve_obstacle,
    rescaling_defect,
    shape_frame,
    homogeneous_disk_radius,
    SHAPE_COLUMNS,
)

__all__ = [
    # Geometry
    "Facet",
    "make_polygon",
    "square",
    "regular_polygon",
    "rounded_square",
    "polygon_vertices",
    "support_radius",
    "resample",
    "perimeter",
    "hausdorff",
    "convexity_violations",
    "detect_facets",
    "facet_frame",
    "facet_coverage",
    "FACET_COLUMNS",
    # Obstacle problems
    "ObstacleProblem",
    "ObstacleSettings",
    "CartesianField",
    "LimitShapeResult",
    "solve_obstacle",
    "rescaling_defect",
    "shape_frame",
    "homogeneous_disk_radius",
    "SHAPE_COLUMNS",
]
