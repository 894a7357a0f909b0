"""Hyperbolic ring patterns as minimizers of the convex functional."""
from __future__ import annotations

from ..functional import BoundaryConditions
from ..grid import QuadComplex
from ..pattern import Geometry, RingState
from .core import Problem, newton_convex
from .options import SolveOptions, SolveReport


def solve_hyperbolic(cx: QuadComplex, q: float, bc: BoundaryConditions,
                     opts: SolveOptions | None = None) -> tuple[RingState, SolveReport]:
    opts = opts or SolveOptions()
    problem = Problem(cx, Geometry.HYPERBOLIC, q, bc)
    u, report = newton_convex(problem, opts)
    return problem.state(u), report
