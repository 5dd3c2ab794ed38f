"""Arctic curves of touching paths: profiles, x0 functions, branches, geodesics."""

from .branches import (
    DEFAULT_POINTS,
    CurveBranch,
    assemble_arctic,
    branch_NILP,
    branch_SE,
    branch_SW,
    conjectural_verticals,
    find_tstar,
    gap_branches,
    limit_point,
    nilp_point,
    q_branches,
    shear_point,
    tropical_curve,
)
from .geodesic import geodesic, tangent_geodesic
from .profiles import DensityProfile, GapSpec, Segment, density_from_endpoints, endpoints_from_density
from .x0 import beta_ranges, moments, moments_q, x0, x0_q

__all__ = [
    "DEFAULT_POINTS",
    "CurveBranch",
    "DensityProfile",
    "GapSpec",
    "Segment",
    "assemble_arctic",
    "beta_ranges",
    "branch_NILP",
    "branch_SE",
    "branch_SW",
    "conjectural_verticals",
    "density_from_endpoints",
    "endpoints_from_density",
    "find_tstar",
    "gap_branches",
    "geodesic",
    "limit_point",
    "moments",
    "moments_q",
    "nilp_point",
    "q_branches",
    "shear_point",
    "tangent_geodesic",
    "tropical_curve",
    "x0",
    "x0_q",
]
