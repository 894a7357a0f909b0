"""Circle patterns (q = 1) and a geometry dispatcher."""
from __future__ import annotations

from ..functional import BoundaryConditions
from ..grid import QuadComplex
from ..pattern import Geometry, RingState
from .hyperbolic import solve_hyperbolic
from .options import SolveOptions, SolveReport
from .spherical import solve_spherical_minmax


def solve(cx: QuadComplex, geometry, q: float, bc: BoundaryConditions,
          opts: SolveOptions | None = None) -> tuple[RingState, SolveReport]:
    if Geometry(geometry) is Geometry.SPHERE:
        return solve_spherical_minmax(cx, q, bc, opts)
    return solve_hyperbolic(cx, q, bc, opts)


def solve_circle_pattern(cx: QuadComplex, bc: BoundaryConditions, geometry,
                         opts: SolveOptions | None = None) -> tuple[RingState, SolveReport]:
    """Orthogonal circle pattern, i.e. the q = 1 member of the family."""
    return solve(cx, geometry, 1.0, bc, opts)
