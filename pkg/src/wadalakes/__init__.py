"""Lakes-of-Wada style canal constructions on the unit square.

Exact counting (box counts, turning counts, island areas), a symbolic
subdivision automaton on typed covering squares, a brute-force raster
oracle, and Minkowski (box-counting) dimension estimation and design.
"""

from .counting import (
    area_bounds_check,
    box_count_general,
    box_count_intermediate,
    box_count_standard,
    count_table,
    dimension_from_counts,
    island_area,
    turning_count,
)
from .raster_oracle import (
    Raster,
    connectivity_check,
    empirical_box_count,
    rasterize,
    render,
    wada_distance_check,
)
from .sequence_params import (
    DimensionReport,
    ParamSequence,
    SequenceSpecError,
    analytic_dimension,
    design_sequence,
    product_dimension,
    scales,
    validate_sequence,
)
from .tiling_automaton import (
    SquareType,
    Tiling,
    census,
    run,
    seed_tilings,
    subdivide,
)

__version__ = "0.1.0"

__all__ = [
    "ParamSequence",
    "SequenceSpecError",
    "DimensionReport",
    "validate_sequence",
    "scales",
    "analytic_dimension",
    "design_sequence",
    "product_dimension",
    "box_count_standard",
    "box_count_general",
    "box_count_intermediate",
    "turning_count",
    "island_area",
    "count_table",
    "area_bounds_check",
    "dimension_from_counts",
    "SquareType",
    "Tiling",
    "seed_tilings",
    "subdivide",
    "run",
    "census",
    "Raster",
    "rasterize",
    "empirical_box_count",
    "wada_distance_check",
    "connectivity_check",
    "render",
    "__version__",
]
