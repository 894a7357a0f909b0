"""Shared problem plumbing and the damped Newton solver for the convex case."""
from __future__ import annotations

import logging
import math

import numpy as np
import scipy.sparse.linalg as spla

from ..elliptic import EllipticContext
from ..functional import (BoundaryConditions, BoundaryError, S_gradient, S_hessian,
                          S_value, compile_phi)
from ..grid import QuadComplex
from ..pattern import Geometry, RingState, flower_residuals, q4_residuals
from .options import SolveOptions, SolveReport, SolverError

log = logging.getLogger("ringforge.solver")


class Problem:
    """A boundary value problem with the prescribed unknowns eliminated."""

    def __init__(self, cx: QuadComplex, geometry, q: float, bc: BoundaryConditions,
                 ctx: EllipticContext | None = None):
        self.cx = cx
        self.geometry = Geometry(geometry)
        self.ctx = ctx if ctx is not None else EllipticContext(q)
        self.q = self.ctx.q
        if cx.n_edges == 0:
            raise BoundaryError("complex has no edges")
        bc.validate(cx, None if self.ctx.q1_mode else self.ctx)
        self.bc = bc
        self.phi = compile_phi(bc, cx, self.geometry)
        self.fixed = bc.fixed_mask(cx)
        self.free = np.flatnonzero(~self.fixed)
        self.fixed_values = bc.dirichlet_array(cx)
        if self.free.size == 0:
            raise BoundaryError("no free unknowns: every vertex is a Dirichlet boundary vertex")

    def at_q(self, q: float, ctx: EllipticContext | None = None) -> "Problem":
        return Problem(self.cx, self.geometry, q, self.bc, ctx)

    @property
    def reference_value(self) -> float:
        """u = K, or 1 in the circle-pattern limit where K is infinite."""
        return 1.0 if self.ctx.q1_mode else self.ctx.K

    def initial(self, init=None) -> np.ndarray:
        if init is None:
            u = np.full(self.cx.n_vertices, self.reference_value)
        else:
            u = np.array(init, dtype=float, copy=True)
            if u.shape != (self.cx.n_vertices,):
                raise ValueError(f"init has shape {u.shape}, expected ({self.cx.n_vertices},)")
        u[self.fixed] = self.fixed_values[self.fixed]
        return u

    def state(self, u) -> RingState:
        return RingState(self.geometry, self.q, u, self.ctx)

    def value(self, u) -> float:
        return S_value(self.state(u), self.phi, self.cx)

    def full_gradient(self, u) -> np.ndarray:
        return S_gradient(self.state(u), self.phi, self.cx)

    def gradient(self, u) -> np.ndarray:
        return self.full_gradient(u)[self.free]

    def hessian(self, u):
        H = S_hessian(self.state(u), self.cx)
        if self.fixed.any():
            H = H[self.free][:, self.free]
        return H.tocsc()

    def expand(self, u, du_free) -> np.ndarray:
        out = np.array(u, dtype=float, copy=True)
        out[self.free] += du_free
        return out


def make_report(problem: Problem, u, iterations: int, converged: bool, message: str,
                history=None) -> SolveReport:
    st = problem.state(u)
    grad = problem.gradient(u)
    flower = flower_residuals(st, problem.cx)
    q4 = q4_residuals(st, problem.cx)
    return SolveReport(
        iterations=iterations,
        grad_norm=float(np.max(np.abs(grad))) if grad.size else 0.0,
        max_flower_residual=float(np.max(np.abs(flower))) if flower.size else 0.0,
        max_q4_residual=float(np.max(q4)) if q4.size else 0.0,
        converged=converged,
        message=message,
        objective_history=list(history or []),
    )


def _max_step_in_box(u, d, upper: float, tau: float) -> float:
    """Largest alpha <= 1 with u + alpha d inside the shrunken box (0, upper)."""
    alpha = 1.0
    neg = d < 0
    if np.any(neg):
        alpha = min(alpha, float(np.min(tau * u[neg] / -d[neg])))
    if math.isfinite(upper):
        pos = d > 0
        if np.any(pos):
            alpha = min(alpha, float(np.min(tau * (upper - u[pos]) / d[pos])))
    return alpha


def newton_convex(problem: Problem, opts: SolveOptions, u0=None):
    """Damped Newton with Armijo backtracking on a convex functional."""
    u = problem.initial(opts.init if u0 is None else u0)
    upper = 2.0 * problem.ctx.K
    if np.any(u[problem.free] <= 0) or np.any(u[problem.free] >= upper):
        raise ValueError("initial state must lie in the open box (0, 2K)")
    S = problem.value(u)
    history = [S]
    for it in range(opts.max_iter + 1):
        G = problem.gradient(u)
        gnorm = float(np.max(np.abs(G)))
        log.debug("newton it=%d S=%.17g |grad|=%.3e", it, S, gnorm)
        if gnorm <= opts.grad_tol:
            return u, make_report(problem, u, it, True, "converged", history)
        if it == opts.max_iter:
            break
        H = problem.hessian(u)
        try:
            d = -spla.splu(H).solve(G)
        except RuntimeError as exc:
            raise SolverError(f"Hessian factorization failed: {exc}") from exc
        slope = float(G @ d)
        if slope >= 0:
            raise SolverError("Newton direction is not a descent direction; Hessian is not positive definite")
        alpha = _max_step_in_box(u[problem.free], d, upper, opts.fraction_to_boundary)
        while True:
            trial = problem.expand(u, alpha * d)
            S_trial = problem.value(trial)
            predicted = opts.armijo_c * alpha * slope
            if S_trial <= S + predicted:
                break
            # Once the predicted decrease drowns in roundoff the value test is
            # meaningless; the gradient test decides convergence instead.
            if -predicted <= 1e-13 * max(1.0, abs(S)):
                break
            alpha *= opts.shrink
            if alpha < 1e-14:
                return u, make_report(problem, u, it, False, "line search stalled", history)
        u, S = trial, S_trial
        history.append(S)
    return u, make_report(problem, u, opts.max_iter, False,
                          f"no convergence in {opts.max_iter} iterations", history)
