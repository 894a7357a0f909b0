"""Orthogonal ring patterns on the sphere and in the hyperbolic plane."""
from __future__ import annotations

from .elliptic import EllipticContext
from .functional import BoundaryConditions, compile_phi
from .grid import QuadComplex, build_even_sublattice, build_from_mask, build_rectangle
from .pattern import Geometry, RingState

__version__ = "0.1.0"

__all__ = [
    "BoundaryConditions", "EllipticContext", "Geometry", "QuadComplex", "RingState",
    "build_even_sublattice", "build_from_mask", "build_rectangle", "compile_phi",
]
