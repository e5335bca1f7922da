from convex_truncation.bodies.bodies import (
    Ball,
    ConvexBody,
    GridUnion,
    Halfspace,
    Hyperplane,
    Intersection,
    Slab,
    axis,
    ball_for_volume,
    get_body_classes,
    grid_union_random,
    halfspace_for_volume,
    slab_for_volume,
)
from convex_truncation.bodies.spec import (
    TruncationSpec,
    as_spec,
    body_from_dict,
    load_spec,
    save_spec,
    spec_from_dict,
)
from convex_truncation.bodies.volume import mc_volume
