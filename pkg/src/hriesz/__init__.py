"""Numerics for the (2n+1)-dimensional Riesz transform on the Heisenberg group.

Group arithmetic and the Koranyi metric (`group`), the Riesz kernel and its
property checks (`kernel`), anisotropic dyadic cubes (`lattice`), atomic
measures (`measure`), truncated-transform operator norms (`riesz`), and the
high-density cube iteration with growth diagnostics (`growth`).  `cli` drives
reproducible experiments from JSON configs.
"""

__version__ = "0.1.0"

from .group import GroupParams, HPoint, ball_volume_mc, dilate, dist, inv, knorm, mul, origin
from .kernel import fundamental_solution, riesz_kernel
from .lattice import CubeId, cube_at, children, parent, sandwich_measure
from .measure import (
    AtomicMeasure,
    CantorParams,
    axis_segment_measure,
    cantor_tube_measure,
    from_atoms,
    mass_in_ball,
    mass_in_cube,
    uniform_on_cube,
)
from .riesz import (
    NormEstimate,
    TruncationPolicy,
    backend_name,
    operator_norm_estimate,
    operator_norm_profile,
    riesz_matvec,
    truncated_riesz,
)
from .growth import (
    GrowthParams,
    HDSelection,
    IterationState,
    cover_dimension_estimate,
    density,
    growth_constant,
    growth_witness,
    hd_select,
    hd_tube_check,
    iterate,
    select_N,
    tube_membership,
)

__all__ = [
    "AtomicMeasure",
    "CantorParams",
    "CubeId",
    "GroupParams",
    "GrowthParams",
    "HDSelection",
    "HPoint",
    "IterationState",
    "NormEstimate",
    "TruncationPolicy",
    "__version__",
    "axis_segment_measure",
    "backend_name",
    "ball_volume_mc",
    "cantor_tube_measure",
    "children",
    "cover_dimension_estimate",
    "cube_at",
    "density",
    "dilate",
    "dist",
    "from_atoms",
    "fundamental_solution",
    "growth_constant",
    "growth_witness",
    "hd_select",
    "hd_tube_check",
    "inv",
    "iterate",
    "knorm",
    "mass_in_ball",
    "mass_in_cube",
    "mul",
    "operator_norm_estimate",
    "operator_norm_profile",
    "origin",
    "parent",
    "riesz_kernel",
    "riesz_matvec",
    "sandwich_measure",
    "select_N",
    "truncated_riesz",
    "tube_membership",
    "uniform_on_cube",
]
