"""Numerical checks of norm inequalities for vector fields in a spherical layer."""

__version__ = "0.1.0"

from .domain import GeometryReport, LayerDomain, geometry_report
from .fields import VectorField, bc_blend_field, builtin_field, field_from_spec, random_blend
from .quadrature import surface_grid, volume_grid
from .surface import RadialSurface, surface_frame, surface_jet
from .verify import integral_bundle, make_grids, verify_identity, verify_inequalities

__all__ = [
    "GeometryReport",
    "LayerDomain",
    "RadialSurface",
    "VectorField",
    "bc_blend_field",
    "builtin_field",
    "field_from_spec",
    "geometry_report",
    "integral_bundle",
    "make_grids",
    "random_blend",
    "surface_frame",
    "surface_grid",
    "surface_jet",
    "verify_identity",
    "verify_inequalities",
    "volume_grid",
]
