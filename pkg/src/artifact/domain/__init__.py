"""Domain geometry: CSG shapes, lattice classification, and complement probes."""

from .shapes import (
    Ball,
    Box,
    Complement,
    Difference,
    FlatCone,
    Halfspace,
    Intersection,
    PowerCusp,
    Shape,
    SolidCone,
    TwistedCone,
    Union,
    shape_from_dict,
)
from .lattice import (
    BOUNDARY,
    EXTERIOR,
    INTERIOR,
    ComplementCap,
    GridDomain,
    build_grid,
    complement_cap,
    density,
    enclosing_center_radius,
    unit_ball_volume,
)
from .angles import (
    criterion_density,
    sigma_hat_bounds,
    solid_angle_lower_bound,
    sphere_measure,
)

__all__ = [
    "Ball",
    "Box",
    "Complement",
    "Difference",
    "FlatCone",
    "Halfspace",
    "Intersection",
    "PowerCusp",
    "Shape",
    "SolidCone",
    "TwistedCone",
    "Union",
    "shape_from_dict",
    "BOUNDARY",
    "EXTERIOR",
    "INTERIOR",
    "ComplementCap",
    "GridDomain",
    "build_grid",
    "complement_cap",
    "density",
    "enclosing_center_radius",
    "unit_ball_volume",
    "criterion_density",
    "sigma_hat_bounds",
    "solid_angle_lower_bound",
    "sphere_measure",
]
