from .bodies import (
    Ball,
    CapModel,
    Ellipsoid,
    Facet,
    Halfspace,
    VPolytope,
    ball_moments,
    body_from_dict,
    body_moments,
    body_to_dict,
    bounding_box,
    boundary_distance,
    clip_halfspace,
    contains,
    convex_hull,
    cube,
    line_intersection,
    outer_normals,
    regular_polygon,
    support,
    transform_body,
    triangulate,
    unit_ball_volume,
)
from .moments import MomentData, Simplex, simplex_moments, simplices_moments
from .predicates import orientation, side_of_hyperplane
from .sampling import UniformSample, sample_uniform
