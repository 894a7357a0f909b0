"""Ring-pattern functionals, their gradients and sparse Hessians.

    S(u) = sum_edges [F(u_j - u_k) + s F(u_j + u_k)] + sum_j Phi_j u_j

with s = -1 on the sphere and s = +1 in the hyperbolic plane.  Critical
points are exactly the ring patterns whose cone angles are encoded in Phi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.sparse as sp

from .elliptic import EllipticContext
from .grid import QuadComplex, Vertex
from .pattern import Geometry, RingState


class BoundaryError(ValueError):
    pass


@dataclass
class BoundaryConditions:
    """Dirichlet values or Neumann cone angles on the boundary rings.

    Values are keyed by lattice vertex.  ``boundary_orientation`` defaults to
    +1 (counter-clockwise) for every boundary ring not listed.
    """

    kind: Literal["dirichlet", "neumann"]
    dirichlet_values: dict[Vertex, float] = field(default_factory=dict)
    neumann_theta: dict[Vertex, float] = field(default_factory=dict)
    boundary_orientation: dict[Vertex, int] = field(default_factory=dict)

    def orientation_of(self, v: Vertex) -> int:
        return int(self.boundary_orientation.get(tuple(v), 1))

    def validate(self, cx: QuadComplex, ctx: EllipticContext | None = None) -> None:
        if self.kind not in ("dirichlet", "neumann"):
            raise BoundaryError(f"unknown boundary condition kind {self.kind!r}")
        if cx.n_edges == 0:
            raise BoundaryError("complex has no edges")
        boundary = [cx.vertices[i] for i in cx.boundary_indices]
        for v, s in self.boundary_orientation.items():
            if s not in (1, -1):
                raise BoundaryError(f"orientation at {v} must be +1 or -1, got {s}")
        if self.kind == "dirichlet":
            missing = [v for v in boundary if v not in self.dirichlet_values]
            if missing:
                raise BoundaryError(f"no Dirichlet value for boundary vertex {missing[0]}")
            if ctx is not None:
                two_k = 2.0 * ctx.K
                for v, val in self.dirichlet_values.items():
                    if not 0.0 <= val <= two_k:
                        raise BoundaryError(f"Dirichlet value {val} at {v} outside [0, 2K] = [0, {two_k}]")
            return
        missing = [v for v in boundary if v not in self.neumann_theta]
        if missing:
            raise BoundaryError(f"no cone angle for boundary vertex {missing[0]}")
        for v in boundary:
            th = self.neumann_theta[v]
            if cx.valence(v) == 1 and not abs(th) < math.pi:
                raise BoundaryError(
                    f"cone angle {th} at valence-1 vertex {v} violates |Theta| < pi")
            if not -2 * math.pi < th < 2 * math.pi:
                raise BoundaryError(f"cone angle {th} at {v} outside (-2pi, 2pi)")

    def fixed_mask(self, cx: QuadComplex) -> np.ndarray:
        """True for vertices whose value is prescribed (Dirichlet boundary)."""
        mask = np.zeros(cx.n_vertices, dtype=bool)
        if self.kind == "dirichlet":
            mask[cx.boundary_indices] = True
        return mask

    def dirichlet_array(self, cx: QuadComplex) -> np.ndarray:
        vals = np.full(cx.n_vertices, np.nan)
        if self.kind != "dirichlet":
            return vals
        for i in cx.boundary_indices:
            vals[i] = self.dirichlet_values[cx.vertices[i]]
        return vals


def uniform_neumann(cx: QuadComplex) -> BoundaryConditions:
    """Cone angles V(v) pi/2 that make u = K a critical point in either geometry."""
    theta = {cx.vertices[i]: cx.valences[i] * math.pi / 2 for i in cx.boundary_indices}
    return BoundaryConditions("neumann", neumann_theta=theta)


def compile_phi(bc: BoundaryConditions, cx: QuadComplex, geometry) -> np.ndarray:
    """Linear coefficients Phi_j of the functional."""
    geometry = Geometry(geometry)
    sphere = geometry is Geometry.SPHERE
    phi = np.zeros(cx.n_vertices)
    phi[cx.interior_indices] = 2 * math.pi if sphere else -2 * math.pi
    if bc.kind == "dirichlet":
        return phi
    vals = cx.valences
    for i in cx.boundary_indices:
        v = cx.vertices[i]
        th, V = bc.neumann_theta[v], vals[i]
        positive = bc.orientation_of(v) > 0
        if sphere:
            phi[i] = math.pi * V - th if positive else -th
        else:
            phi[i] = -th if positive else -math.pi * V - th
    return phi


def _edge_arrays(cx: QuadComplex):
    e = np.asarray(cx.edges, dtype=int).reshape(-1, 2)
    return e[:, 0], e[:, 1]


def S_value(state: RingState, phi: np.ndarray, cx: QuadComplex) -> float:
    j, k = _edge_arrays(cx)
    u, ctx, s = state.u, state.ctx, state.geometry.edge_sign
    edge_sum = np.sum(ctx.F(u[j] - u[k]) + s * ctx.F(u[j] + u[k]))
    return float(edge_sum + np.dot(phi, u))


def S_gradient(state: RingState, phi: np.ndarray, cx: QuadComplex) -> np.ndarray:
    j, k = _edge_arrays(cx)
    u, ctx, s = state.u, state.ctx, state.geometry.edge_sign
    minus = ctx.g(u[j] - u[k])
    plus = s * ctx.g(u[j] + u[k])
    n = cx.n_vertices
    grad = np.bincount(j, weights=minus + plus, minlength=n)
    grad += np.bincount(k, weights=-minus + plus, minlength=n)
    return grad + phi


def S_hessian(state: RingState, cx: QuadComplex) -> sp.csr_matrix:
    """Sparse symmetric Hessian; F'' = g' = (dn + q cn)/2 on both edge terms."""
    j, k = _edge_arrays(cx)
    u, ctx, s = state.u, state.ctx, state.geometry.edge_sign
    a = ctx.g_prime(u[j] - u[k])
    b = s * ctx.g_prime(u[j] + u[k])
    diag = np.bincount(j, weights=a + b, minlength=cx.n_vertices)
    diag += np.bincount(k, weights=a + b, minlength=cx.n_vertices)
    off = b - a
    n = cx.n_vertices
    rows = np.concatenate([np.arange(n), j, k])
    cols = np.concatenate([np.arange(n), k, j])
    data = np.concatenate([diag, off, off])
    return sp.csr_matrix((data, (rows, cols)), shape=(n, n))


def S_q_derivative_of_gradient(state: RingState, phi: np.ndarray, cx: QuadComplex,
                               h: float = 1e-6) -> np.ndarray:
    """d/dq of the gradient by finite differences in the modulus.

    Central differences where q +- h stays below 1, otherwise the second-order
    one-sided backward stencil.
    """
    q = state.q

    def grad_at(qq):
        return S_gradient(RingState(state.geometry, qq, state.u), phi, cx)

    if q + h < 1.0:
        return (grad_at(q + h) - grad_at(q - h)) / (2.0 * h)
    return (3.0 * grad_at(q) - 4.0 * grad_at(q - h) + grad_at(q - 2.0 * h)) / (2.0 * h)
