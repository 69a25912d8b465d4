"""Exact computations in the free field over the rationals via admissible linear systems."""

from .als import (ALS, Alphabet, ExtendedALS, PivotStructure, Transformation, als_from_rows,
                  apply_transformation, empty_als, extend, mirror, parse_als, pivot_structure,
                  restrict, serialize, validate)
from .linalg import Mat, invert_scalar, rref, solve
from .poly import NCPoly

__all__ = [
    "ALS", "Alphabet", "ExtendedALS", "PivotStructure", "Transformation", "als_from_rows",
    "apply_transformation", "empty_als", "extend", "mirror", "parse_als", "pivot_structure",
    "restrict", "serialize", "validate", "Mat", "invert_scalar", "rref", "solve", "NCPoly",
]
