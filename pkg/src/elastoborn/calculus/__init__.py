"""Field representation and the operator toolbox."""
from elastoborn.calculus.grid import (
    AXES,
    E1,
    E2,
    E3,
    Direction,
    Field,
    Grid,
    ScalarField,
    SupportTag,
    VectorField,
    field_values,
    zeros_like,
)
from elastoborn.calculus.operators import (
    Backend,
    NormKind,
    Region,
    apply_symbol,
    compact_taper,
    diff,
    directional,
    double_antiderivative,
    gradient,
    inverse_transport,
    invert_symbol,
    laplacian,
    norm,
    ray_antiderivative,
    relative_difference,
    sobolev_fd_norm,
    taper,
    truncate,
)
from elastoborn.calculus.symbols import BILAPLACIAN, LAPLACIAN, SymbolPolynomial, sphere_points

__all__ = [
    "AXES",
    "BILAPLACIAN",
    "Backend",
    "Direction",
    "E1",
    "E2",
    "E3",
    "Field",
    "Grid",
    "LAPLACIAN",
    "NormKind",
    "Region",
    "ScalarField",
    "SupportTag",
    "SymbolPolynomial",
    "VectorField",
    "apply_symbol",
    "compact_taper",
    "diff",
    "directional",
    "double_antiderivative",
    "field_values",
    "gradient",
    "inverse_transport",
    "invert_symbol",
    "laplacian",
    "norm",
    "ray_antiderivative",
    "relative_difference",
    "sobolev_fd_norm",
    "sphere_points",
    "taper",
    "truncate",
    "zeros_like",
]
