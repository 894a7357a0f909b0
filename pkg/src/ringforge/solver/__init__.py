"""Boundary value problem solvers."""
from __future__ import annotations

from .circle import solve, solve_circle_pattern
from .continuation import ContinuationStep, continuation, default_steps
from .core import Problem
from .hyperbolic import solve_hyperbolic
from .limit import OrderCheck, sinh_gordon_order_check
from .options import HessianSingularError, SolveOptions, SolveReport, SolverError
from .spherical import ConcavityError, reduced_spherical, solve_spherical_minmax

__all__ = [
    "ConcavityError", "ContinuationStep", "HessianSingularError", "OrderCheck", "Problem",
    "SolveOptions", "SolveReport", "SolverError", "continuation", "default_steps",
    "reduced_spherical", "sinh_gordon_order_check", "solve", "solve_circle_pattern",
    "solve_hyperbolic", "solve_spherical_minmax",
]
