"""Solver options, reports and error types."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class SolverError(RuntimeError):
    pass


class HessianSingularError(SolverError):
    """Raised when the Hessian along a continuation path stops being invertible."""

    def __init__(self, message: str, q: float):
        q = float(q)
        super().__init__(f"{message} (q = {q!r})")
        self.q = q


@dataclass
class SolveOptions:
    grad_tol: float = 1e-10
    max_iter: int = 200
    armijo_c: float = 1e-4
    shrink: float = 0.5
    fraction_to_boundary: float = 0.95
    # None means the uniform state u = K; otherwise a per-vertex start vector.
    init: np.ndarray | None = None

    def __post_init__(self):
        if not self.grad_tol > 0:
            raise ValueError(f"grad_tol must be positive, got {self.grad_tol}")
        if self.max_iter < 0:
            raise ValueError(f"max_iter must be non-negative, got {self.max_iter}")
        if not 0 < self.armijo_c < 1 or not 0 < self.shrink < 1:
            raise ValueError("Armijo parameters must lie in (0, 1)")
        if not 0 < self.fraction_to_boundary < 1:
            raise ValueError("fraction_to_boundary must lie in (0, 1)")


@dataclass
class SolveReport:
    iterations: int
    grad_norm: float
    max_flower_residual: float
    max_q4_residual: float
    converged: bool
    message: str = ""
    objective_history: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
            "max_flower_residual": self.max_flower_residual,
            "max_q4_residual": self.max_q4_residual,
            "converged": self.converged,
            "message": self.message,
        }
