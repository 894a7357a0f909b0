"""Spherical ring patterns as min-max critical points.

S_sph is concave along v = (1, ..., 1), so it is first maximized along that
line and the reduced functional is then minimized on a hyperplane
sum(beta) = const.
"""
from __future__ import annotations

import logging
import numpy as np
import scipy.sparse.linalg as spla

from ..functional import BoundaryConditions, S_gradient, S_hessian, S_value
from ..grid import QuadComplex
from ..pattern import Geometry, RingState
from .core import Problem, make_report
from .options import SolveOptions, SolveReport, SolverError

log = logging.getLogger("ringforge.solver")

LINE_TOL = 1e-12


class ConcavityError(SolverError):
    """S_sph is not concave along v at the current state."""


def _line_max(problem: Problem, u: np.ndarray, tol: float = LINE_TOL) -> tuple[np.ndarray, float]:
    """Maximize t -> S(u + t v) over the free vertices; returns (u + t* v, t*)."""
    free = problem.free

    def slope(t):
        w = u.copy()
        w[free] += t
        G = problem.full_gradient(w)[free]
        return float(G.sum()), w

    def curvature(w):
        H = S_hessian(problem.state(w), problem.cx)
        if problem.fixed.any():
            H = H[free][:, free]
        return float(H.sum())

    f0, w = slope(0.0)
    c0 = curvature(w)
    if not c0 < 0:
        raise ConcavityError(f"S_sph is not concave along v (v^T H v = {c0:.3e})")
    if abs(f0) <= tol:
        return w, 0.0
    # bracket [lo, hi] with f(lo) > 0 > f(hi)
    step = max(1.0, abs(f0 / c0))
    if f0 > 0:
        lo, hi = 0.0, step
        while slope(hi)[0] > 0:
            lo, hi = hi, 2.0 * hi
            if hi > 1e6:
                raise ConcavityError("no maximizer along v")
    else:
        lo, hi = -step, 0.0
        while slope(lo)[0] < 0:
            lo, hi = 2.0 * lo, lo
            if lo < -1e6:
                raise ConcavityError("no maximizer along v")
    t, f, c = 0.0, f0, c0
    for _ in range(200):
        t_new = t - f / c if c < 0 else 0.5 * (lo + hi)
        if not lo < t_new < hi:
            t_new = 0.5 * (lo + hi)
        t = t_new
        f, w = slope(t)
        if f > 0:
            lo = t
        else:
            hi = t
        if abs(f) <= tol or hi - lo <= 4 * np.spacing(max(abs(lo), abs(hi), 1.0)):
            return w, t
        c = curvature(w)
    return w, t


def reduced_spherical(state: RingState, phi: np.ndarray, cx: QuadComplex) -> tuple[float, float]:
    """Reduced value max_t S_sph(beta + t v) and the maximizer t*."""
    if state.geometry is not Geometry.SPHERE:
        raise ValueError("reduced functional is defined for the spherical geometry")
    shadow = _FreeShadow(state, phi, cx)
    w, t = _line_max(shadow, state.u.copy())
    return S_value(state.with_u(w), phi, cx), t


class _FreeShadow:
    """Minimal stand-in for Problem with every vertex free."""

    def __init__(self, state: RingState, phi, cx: QuadComplex):
        self._state, self.phi, self.cx = state, phi, cx
        self.free = np.arange(cx.n_vertices)
        self.fixed = np.zeros(cx.n_vertices, dtype=bool)

    def state(self, u):
        return self._state.with_u(u)

    def full_gradient(self, u):
        return S_gradient(self.state(u), self.phi, self.cx)


def _reduced_value(problem: Problem, u):
    w, _ = _line_max(problem, u)
    return w, problem.value(w)


def minmax_spherical(problem: Problem, opts: SolveOptions, u0=None):
    u = problem.initial(opts.init if u0 is None else u0)
    n = problem.free.size
    try:
        u, S = _reduced_value(problem, u)
    except ConcavityError as exc:
        return u, make_report(problem, u, 0, False, str(exc))
    history = [S]
    for it in range(opts.max_iter + 1):
        G = problem.gradient(u)
        gnorm = float(np.max(np.abs(G)))
        log.debug("minmax it=%d S~=%.17g |grad|=%.3e", it, S, gnorm)
        if gnorm <= opts.grad_tol:
            return u, make_report(problem, u, it, True, "converged", history)
        if it == opts.max_iter:
            break
        # G is orthogonal to v after the line maximization, so the projected
        # full Newton step is the Newton step of the reduced functional.
        G = G - G.sum() / n
        try:
            d = -spla.splu(problem.hessian(u)).solve(G)
            d -= d.sum() / n
            ok = bool(np.all(np.isfinite(d)))
        except RuntimeError:
            ok = False
        try:
            step = None
            if ok and G @ d < 0:
                step = _armijo_reduced(problem, u, S, G, d, opts)
            if step is None and ok:
                step = _merit_step(problem, u, G, d, opts)
            if step is None:
                step = _armijo_reduced(problem, u, S, G, -G, opts)
        except ConcavityError as exc:
            return u, make_report(problem, u, it, False, str(exc), history)
        if step is None:
            return u, make_report(problem, u, it, False, "line search stalled", history)
        u, S = step
        history.append(S)
    return u, make_report(problem, u, opts.max_iter, False,
                          f"no convergence in {opts.max_iter} iterations", history)


def _armijo_reduced(problem, u, S, G, d, opts):
    slope = float(G @ d)
    alpha = 1.0
    while alpha >= 1e-14:
        w, S_trial = _reduced_value(problem, problem.expand(u, alpha * d))
        predicted = opts.armijo_c * alpha * slope
        if S_trial <= S + predicted or -predicted <= 1e-13 * max(1.0, abs(S)):
            return w, S_trial
        alpha *= opts.shrink
    return None


def _merit_step(problem, u, G, d, opts):
    """Newton step accepted on decrease of the gradient norm.

    Used when the reduced Hessian is indefinite, so the Newton direction
    need not descend the reduced functional.
    """
    g0 = float(np.linalg.norm(G))
    alpha = 1.0
    while alpha >= 1e-6:
        w, S_trial = _reduced_value(problem, problem.expand(u, alpha * d))
        if np.linalg.norm(problem.gradient(w)) <= (1.0 - opts.armijo_c * alpha) * g0:
            return w, S_trial
        alpha *= opts.shrink
    return None


def solve_spherical_minmax(cx: QuadComplex, q: float, bc: BoundaryConditions,
                           opts: SolveOptions | None = None,
                           init=None) -> tuple[RingState, SolveReport]:
    opts = opts or SolveOptions()
    problem = Problem(cx, Geometry.SPHERE, q, bc)
    u, report = minmax_spherical(problem, opts, init)
    return problem.state(u), report
