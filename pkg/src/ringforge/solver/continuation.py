"""Deformation of circle patterns into ring patterns by following q.

Along a branch of critical points f(u, q) = grad S = 0 the implicit function
theorem gives du/dq = -H^{-1} df/dq.  The ODE is integrated with RK4 in q and
every step is polished by Newton on f at the new modulus.  The branch is
abandoned as soon as the Hessian becomes (numerically) singular, which also
covers a change of its inertia between consecutive steps.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from ..elliptic import EllipticContext
from ..functional import BoundaryConditions
from ..grid import QuadComplex
from ..pattern import RingState
from .core import Problem, make_report
from .options import HessianSingularError, SolveOptions, SolveReport

log = logging.getLogger("ringforge.continuation")

FD_STEP = 1e-6
COND_LIMIT = 1e12
DENSE_SPECTRUM_LIMIT = 4000
CORRECTOR_ITER = 25


def default_steps(from_q: float, target_q: float) -> int:
    return max(10, math.ceil(abs(from_q - target_q) / 0.002))


@dataclass
class ContinuationStep:
    q: float
    u: np.ndarray
    grad_norm: float
    negative_eigenvalues: int | None


class _Branch:
    def __init__(self, cx: QuadComplex, geometry, bc: BoundaryConditions):
        self.cx, self.geometry, self.bc = cx, geometry, bc
        self._cache: dict[float, Problem] = {}

    def problem(self, q: float) -> Problem:
        if q not in self._cache:
            if len(self._cache) > 16:
                self._cache.clear()
            self._cache[q] = Problem(self.cx, self.geometry, q, self.bc, EllipticContext(q))
        return self._cache[q]

    def dfdq(self, u, q: float) -> np.ndarray:
        h = FD_STEP
        if q + h < 1.0:
            return (self.problem(q + h).gradient(u) - self.problem(q - h).gradient(u)) / (2 * h)
        return (3 * self.problem(q).gradient(u) - 4 * self.problem(q - h).gradient(u)
                + self.problem(q - 2 * h).gradient(u)) / (2 * h)

    def velocity(self, u, q: float) -> np.ndarray:
        p = self.problem(q)
        try:
            lu = spla.splu(p.hessian(u))
        except RuntimeError:
            raise HessianSingularError("Hessian factorization failed", q) from None
        du = -lu.solve(self.dfdq(u, q))
        if not np.all(np.isfinite(du)):
            raise HessianSingularError("Hessian is singular", q)
        return du


def hessian_spectrum(problem: Problem, u) -> np.ndarray | None:
    """Eigenvalues of the reduced Hessian, or None when too large for dense work."""
    if problem.free.size > DENSE_SPECTRUM_LIMIT:
        return None
    return np.linalg.eigvalsh(problem.hessian(u).toarray())


def _check_rigid(problem: Problem, u, q: float, prev: np.ndarray | None):
    ev = hessian_spectrum(problem, u)
    if ev is None:
        return None
    amax, amin = np.max(np.abs(ev)), np.min(np.abs(ev))
    if amin == 0.0 or amax / amin > COND_LIMIT:
        raise HessianSingularError(f"Hessian condition number {amax / max(amin, 1e-300):.3e} exceeds {COND_LIMIT:.0e}", q)
    if prev is not None:
        n_prev, n_now = int(np.sum(prev[0] < 0)), int(np.sum(ev < 0))
        if n_prev != n_now:
            # locate the crossing by linear interpolation of the eigenvalue
            # that changed sign
            k = min(n_prev, n_now)
            lam0, lam1 = prev[0][k], ev[k]
            q0 = prev[1]
            q_star = q0 + (q - q0) * lam0 / (lam0 - lam1) if lam0 != lam1 else q
            raise HessianSingularError(
                f"Hessian inertia changed from {n_prev} to {n_now} negative eigenvalues; "
                "an eigenvalue crossed zero", float(q_star))
    return ev


def _correct(branch: _Branch, u, q: float, opts: SolveOptions) -> tuple[np.ndarray, float]:
    p = branch.problem(q)
    gnorm = math.inf
    for _ in range(CORRECTOR_ITER):
        G = p.gradient(u)
        gnorm = float(np.max(np.abs(G)))
        if gnorm <= opts.grad_tol:
            return u, gnorm
        try:
            d = -spla.splu(p.hessian(u)).solve(G)
        except RuntimeError:
            raise HessianSingularError("Hessian factorization failed in the corrector", q) from None
        u = p.expand(u, d)
    G = p.gradient(u)
    gnorm = float(np.max(np.abs(G)))
    if gnorm <= opts.grad_tol:
        return u, gnorm
    raise HessianSingularError(f"Newton corrector failed (|grad| = {gnorm:.3e})", q)


def continuation(start: RingState, cx: QuadComplex, bc: BoundaryConditions, target_q: float,
                 steps: int | None = None, opts: SolveOptions | None = None,
                 trace: list | None = None) -> tuple[RingState, SolveReport]:
    """Follow a rigid critical point from ``start.q`` to ``target_q``.

    ``start`` must already solve the problem at its own modulus (usually a
    circle pattern at q = 1).  Raises :class:`HessianSingularError` carrying
    the modulus at which rigidity is lost.
    """
    opts = opts or SolveOptions()
    q0 = float(start.q)
    if not 0.0 < target_q <= 1.0:
        raise ValueError(f"target modulus must lie in (0, 1], got {target_q}")
    if steps is None:
        steps = default_steps(q0, target_q)
    branch = _Branch(cx, start.geometry, bc)
    first = Problem(cx, start.geometry, q0, bc, start.ctx)
    branch._cache[q0] = first
    u = first.initial(start.u)
    u, gnorm = _correct(branch, u, q0, opts)
    ev = _check_rigid(first, u, q0, None)
    prev = (ev, q0) if ev is not None else None
    if trace is not None:
        trace.append(ContinuationStep(q0, u.copy(), gnorm, None if ev is None else int(np.sum(ev < 0))))
    if target_q == q0 or steps == 0:
        return first.state(u), make_report(first, u, 0, gnorm <= opts.grad_tol, "no continuation needed")
    qs = np.linspace(q0, target_q, steps + 1)
    free = first.free
    for q_a, q_b in zip(qs[:-1], qs[1:]):
        h = q_b - q_a
        q_mid = q_a + 0.5 * h

        def shifted(du):
            out = u.copy()
            out[free] += du
            return out

        k1 = branch.velocity(u, q_a)
        k2 = branch.velocity(shifted(0.5 * h * k1), q_mid)
        k3 = branch.velocity(shifted(0.5 * h * k2), q_mid)
        k4 = branch.velocity(shifted(h * k3), q_b)
        u = shifted(h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0)
        u, gnorm = _correct(branch, u, float(q_b), opts)
        ev = _check_rigid(branch.problem(float(q_b)), u, float(q_b), prev)
        prev = (ev, float(q_b)) if ev is not None else None
        log.info("continuation q=%.10g |grad|=%.3e", q_b, gnorm)
        if trace is not None:
            trace.append(ContinuationStep(float(q_b), u.copy(), gnorm,
                                          None if ev is None else int(np.sum(ev < 0))))
    final = branch.problem(float(qs[-1]))
    return final.state(u), make_report(final, u, steps, gnorm <= opts.grad_tol,
                                       f"continued in {steps} steps")
