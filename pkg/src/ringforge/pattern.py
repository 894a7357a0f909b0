"""Pointwise ring geometry on the sphere and in the hyperbolic plane.

A ring is parametrised by one real variable ``u`` in [0, 2K] (the spherical
``beta`` or the hyperbolic ``gamma``).  Rings with ``u <= K`` carry a
non-negative inner radius (counter-clockwise orientation), rings with
``u > K`` a negative one.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import elliprf

from .elliptic import EllipticContext
from .grid import QuadComplex


class Geometry(str, enum.Enum):
    SPHERE = "sphere"
    HYPERBOLIC = "hyperbolic"

    @property
    def edge_sign(self) -> int:
        """Sign in front of F(u_j + u_k) in the functional."""
        return -1 if self is Geometry.SPHERE else 1


class RingRadii(NamedTuple):
    r: np.ndarray | float  # signed inner radius
    R: np.ndarray | float  # outer radius


@dataclass
class RingState:
    geometry: Geometry
    q: float
    u: np.ndarray
    ctx: EllipticContext = field(default=None, repr=False)

    def __post_init__(self):
        self.geometry = Geometry(self.geometry)
        self.u = np.asarray(self.u, dtype=float)
        if self.ctx is None:
            self.ctx = EllipticContext(self.q)
        elif self.ctx.q != self.q:
            raise ValueError("context modulus does not match state modulus")

    def with_u(self, u) -> "RingState":
        return RingState(self.geometry, self.q, np.array(u, dtype=float), self.ctx)

    def radii(self) -> RingRadii:
        return radii_from_u(self.u, self.geometry, self.ctx)

    def orientation(self) -> np.ndarray:
        return orientation(self.u, self.ctx)

    def in_admissible_box(self, tol: float = 0.0) -> bool:
        return bool(np.all(self.u >= -tol) and np.all(self.u <= 2 * self.ctx.K + tol))


def orientation(u, ctx: EllipticContext):
    """+1 for u <= K (r >= 0), -1 for u > K."""
    return np.where(np.asarray(u) <= ctx.K, 1, -1)


def radii_from_u(u, geometry, ctx: EllipticContext) -> RingRadii:
    geometry = Geometry(geometry)
    u = np.asarray(u, dtype=float)
    sn, cn, dn = ctx.jacobi(u)
    if geometry is Geometry.SPHERE:
        r = np.arctan2(cn, sn)
        R = np.arctan2(dn, ctx.q * sn)
        return RingRadii(r, R)
    if np.any(u <= 0.0) or np.any(u >= 2.0 * ctx.K):
        raise ValueError("hyperbolic rings at u = 0 or u = 2K have infinite radius")
    r = np.arcsinh(cn / sn)
    R = np.arcsinh(dn / (ctx.q * sn))
    return RingRadii(r, R)


def _incomplete_F(sin_phi, cos_phi, ctx: EllipticContext):
    """Jacobi argument with am = phi in [0, pi/2], via Carlson's R_F."""
    c2 = cos_phi * cos_phi
    return sin_phi * elliprf(c2, c2 + (ctx.qp * sin_phi) ** 2, 1.0)


def u_from_outer_radius(R, orient, geometry, ctx: EllipticContext):
    """Inverse of :func:`radii_from_u` on the branch u in [0, 2K]."""
    geometry = Geometry(geometry)
    R = np.asarray(R, dtype=float)
    orient = np.broadcast_to(np.asarray(orient), R.shape)
    q = ctx.q
    if geometry is Geometry.SPHERE:
        R0 = math.acos(q)
        if np.any(R < R0 - 1e-15) or np.any(R > math.pi / 2 + 1e-15):
            raise ValueError(f"spherical outer radius must lie in [arccos q, pi/2] = [{R0}, {math.pi / 2}]")
        sin_phi = np.clip(np.cos(R) / q, 0.0, 1.0)  # sn u = cos r
    else:
        R0 = math.acosh(1.0 / q)
        if np.any(R < R0 - 1e-15):
            raise ValueError(f"hyperbolic outer radius must be >= arccosh(1/q) = {R0}")
        sin_phi = np.clip(1.0 / (q * np.cosh(R)), 0.0, 1.0)
    cos_phi = np.sqrt((1.0 - sin_phi) * (1.0 + sin_phi))
    base = _incomplete_F(sin_phi, cos_phi, ctx)
    if ctx.q1_mode:
        if np.any(orient < 0):
            raise ValueError("circle patterns (q = 1) are positively oriented")
        return base
    return np.where(orient >= 0, base, 2.0 * ctx.K - base)


def u_from_inner_radius(r, geometry, ctx: EllipticContext):
    """Inverse of :func:`radii_from_u` from the signed inner radius."""
    geometry = Geometry(geometry)
    r = np.asarray(r, dtype=float)
    if geometry is Geometry.SPHERE:
        sin_phi, cos_phi = np.cos(r), np.abs(np.sin(r))
    else:
        sin_phi = 1.0 / np.cosh(r)
        cos_phi = np.abs(np.tanh(r))
    base = _incomplete_F(sin_phi, cos_phi, ctx)
    if ctx.q1_mode:
        return base
    return np.where(r >= 0, base, 2.0 * ctx.K - base)


def theta(u, u_k, geometry, ctx: EllipticContext):
    """Signed opening angle of the kite spanned by rings u and u_k, seen from u."""
    geometry = Geometry(geometry)
    u = np.asarray(u, dtype=float)
    u_k = np.asarray(u_k, dtype=float)
    neg = u > ctx.K
    if geometry is Geometry.SPHERE:
        return ctx.g(u - u_k) - ctx.g(u + u_k) + np.where(neg, 0.0, math.pi)
    return ctx.g(u - u_k) + ctx.g(u + u_k) - np.where(neg, math.pi, 0.0)


def kite_angles(u, u_k, geometry, ctx: EllipticContext):
    """Angles (phi_k, psi_k) at the centre of ring u from Napier's rule.

    ``phi_k`` lies between the centre direction and the touching point on the
    inner circle of ``u``; ``psi_k`` between the centre direction and the
    point on its outer circle.
    """
    geometry = Geometry(geometry)
    r, R = radii_from_u(u, geometry, ctx)
    r_k, R_k = radii_from_u(u_k, geometry, ctx)
    if geometry is Geometry.SPHERE:
        s_r, s_R, t_rk, t_Rk = np.sin(r), np.sin(R), np.tan(r_k), np.tan(R_k)
    else:
        s_r, s_R, t_rk, t_Rk = np.sinh(r), np.sinh(R), np.tanh(r_k), np.tanh(R_k)
    if np.any(np.abs(s_r) < 1e-14):
        raise ValueError("phi_k is undefined for a degenerate ring with r = 0; use theta")
    return np.arctan(t_Rk / s_r), np.arctan(t_rk / s_R)


def center_distance(u, u_k, geometry, ctx: EllipticContext):
    """Distance between the centres of two orthogonally intersecting rings."""
    geometry = Geometry(geometry)
    r, R = radii_from_u(u, geometry, ctx)
    r_k, R_k = radii_from_u(u_k, geometry, ctx)
    if geometry is Geometry.SPHERE:
        return np.arccos(np.clip(np.cos(R) * np.cos(r_k), -1.0, 1.0))
    return np.arccosh(np.maximum(np.cosh(R) * np.cosh(r_k), 1.0))


# -- per-vertex residuals ---------------------------------------------------

def _directed(cx: QuadComplex):
    e = np.asarray(cx.edges, dtype=int).reshape(-1, 2)
    src = np.concatenate([e[:, 0], e[:, 1]])
    dst = np.concatenate([e[:, 1], e[:, 0]])
    return src, dst


def cone_angles(state: RingState, cx: QuadComplex) -> np.ndarray:
    """Sum of the kite angles around every vertex."""
    src, dst = _directed(cx)
    th = theta(state.u[src], state.u[dst], state.geometry, state.ctx)
    return np.bincount(src, weights=th, minlength=cx.n_vertices)


def flower_residuals(state: RingState, cx: QuadComplex) -> np.ndarray:
    """Cone angle minus (+-2 pi) at every interior vertex, in interior order."""
    interior = np.asarray(cx.interior_indices, dtype=int)
    cone = cone_angles(state, cx)[interior]
    return cone - 2.0 * math.pi * orientation(state.u[interior], state.ctx)


def flower_residual(state: RingState, cx: QuadComplex, v) -> float:
    i = cx.index.get(tuple(v)) if not isinstance(v, (int, np.integer)) else int(v)
    if i is None:
        raise ValueError(f"unknown vertex {v}")
    if cx.valences[i] != 4:
        raise ValueError(f"vertex {cx.vertices[i]} is not interior")
    nbrs = [j for j in cx.neighbor_slots(i) if j >= 0]
    th = theta(state.u[i], state.u[nbrs], state.geometry, state.ctx)
    return float(np.sum(th) - 2.0 * math.pi * orientation(state.u[i], state.ctx))


class Q4Residual(NamedTuple):
    modulus: float  # |prod - 1|
    phase: float  # arg prod, wrapped to (-pi, pi]


def _q4_phase(state: RingState, i: int, nbrs) -> float:
    ctx, u = state.ctx, state.u
    up, um = ctx.g(u[i] + u[nbrs]), ctx.g(u[i] - u[nbrs])
    if state.geometry is Geometry.SPHERE:
        # arg sn((x + iK')/2) = pi/2 - g(x)
        return float(np.sum(up - um))
    # denominator uses the conjugate shift -iK', whose argument is g - pi/2
    return float(np.sum(math.pi - um - up))


def q4_laplace_residual(state: RingState, cx: QuadComplex, v) -> Q4Residual:
    """Residual of the Laplace-type Q4 product around an interior vertex.

    Each factor has modulus one on the real axis, so the product is e^{iA}
    and the residual is |e^{iA} - 1| = 2 |sin(A/2)|.
    """
    i = cx.index.get(tuple(v)) if not isinstance(v, (int, np.integer)) else int(v)
    if i is None or cx.valences[i] != 4:
        raise ValueError(f"{v} is not an interior vertex")
    nbrs = np.array([j for j in cx.neighbor_slots(i) if j >= 0])
    a = _q4_phase(state, i, nbrs)
    wrapped = math.remainder(a, 2.0 * math.pi)
    return Q4Residual(abs(2.0 * math.sin(0.5 * a)), wrapped)


def q4_residuals(state: RingState, cx: QuadComplex) -> np.ndarray:
    return np.array([q4_laplace_residual(state, cx, i).modulus for i in cx.interior_indices])
