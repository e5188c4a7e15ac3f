"""
Cone envelopes of direction functions and approximations of pinning data.
"""

from .operators import (
    DirectionFunction,
    DistanceMetric,
    kernel_table,
    inf_convolve_dir,
    sup_convolve_dir,
    inf_convolve_dir_brute,
    sup_convolve_dir_brute,
    lipschitz_defect,
    build_Qm,
    build_Qm_lower,
    monotone_lower,
    monotone_upper,
    double_regularize,
    from_samples,
    direction_function_frame,
    read_direction_frame,
    DEFAULT_SAMPLES,
    DIRECTION_COLUMNS,
)

__all__ = [
    # Types
    "DirectionFunction",
    "DistanceMetric",
    "kernel_table",
    # Envelopes
    "inf_convolve_dir",
    "sup_convolve_dir",
    "inf_convolve_dir_brute",
    "sup_convolve_dir_brute",
    "lipschitz_defect",
    # Pinning data approximations
    "build_Qm",
    "build_Qm_lower",
    "monotone_lower",
    "monotone_upper",
    "double_regularize",
    # I/O
    "from_samples",
    "direction_function_frame",
    "read_direction_frame",
    "DEFAULT_SAMPLES",
    "DIRECTION_COLUMNS",
]
