"""
Slab grids, discrete harmonic solves, and sup/inf convolution.
"""

from .slab import (
    SlabGrid,
    GridField,
    HeightFunction,
    dump_field,
    load_field,
    MAX_GRID_SPACING,
)
from .harmonic import (
    harmonic_solve,
    boundary_gradient,
    FrontResponse,
    data_line_gradient,
    laplacian,
    dirichlet_solve,
    HARMONIC_RESIDUAL_TOL,
)
from .convolution import (
    sup_convolve,
    inf_convolve,
    sup_convolve_variable,
    graph_extension,
)

__all__ = [
    # Grids
    "SlabGrid",
    "GridField",
    "HeightFunction",
    "dump_field",
    "load_field",
    "MAX_GRID_SPACING",
    # Harmonic solves
    "harmonic_solve",
    "boundary_gradient",
    "FrontResponse",
    "data_line_gradient",
    "laplacian",
    "dirichlet_solve",
    "HARMONIC_RESIDUAL_TOL",
    # Convolutions
    "sup_convolve",
    "inf_convolve",
    "sup_convolve_variable",
    "graph_extension",
]
