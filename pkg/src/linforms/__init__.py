"""Averages over systems of integer linear forms, on Z_N and on filtered tori."""

__version__ = "0.1.0"

from .errors import (
    BudgetError,
    DimensionError,
    LinformsError,
    NumericError,
    ValidationError,
)
from .linsys import (
    LinearFormSystem,
    complexity,
    make_ap_system,
    make_cube_system,
    make_system,
    make_system_relaxed,
    make_trivial_system,
    size,
)
from .lattice import (
    IntegerLattice,
    contains,
    lattice_from_generators,
    leibman_generators,
    leibman_lattice,
    orthogonal_complement,
    rank,
    vector_binomial,
)

__all__ = [
    "BudgetError",
    "DimensionError",
    "IntegerLattice",
    "LinearFormSystem",
    "LinformsError",
    "NumericError",
    "ValidationError",
    "complexity",
    "contains",
    "lattice_from_generators",
    "leibman_generators",
    "leibman_lattice",
    "make_ap_system",
    "make_cube_system",
    "make_system",
    "make_system_relaxed",
    "make_trivial_system",
    "orthogonal_complement",
    "rank",
    "size",
    "vector_binomial",
]
