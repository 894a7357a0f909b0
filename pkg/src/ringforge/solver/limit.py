"""Smooth limit: small rings and the elliptic sinh-Gordon equations.

With q' = eps and the ring variable written as K - u, rings of radii of
order eps cosh u sit on a lattice of spacing eps, and the flower residual at a
vertex behaves like

    sphere:      eps^2 (Lap u + sinh 2u) + O(eps^4)
    hyperbolic:  eps^2 (Lap u - sinh 2u) + O(eps^4)

The factor in front (the calibration constant) is fixed by the constant field
u = c, whose residual is +eps^2 sinh 2c on the sphere and -eps^2 sinh 2c in
the hyperbolic plane, so both constants equal 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..elliptic import EllipticContext
from ..pattern import Geometry, orientation, theta

CALIBRATION = {Geometry.SPHERE: 1.0, Geometry.HYPERBOLIC: 1.0}
ROUNDOFF = 1e-12
_STENCIL = ((1, 0), (0, 1), (-1, 0), (0, -1))


class LimitRegimeError(ValueError):
    """The eps sequence is not yet in the asymptotic regime."""


@dataclass
class OrderCheck:
    eps: list[float]
    normalized: list[float]  # residual / (C eps^2)
    limit: float  # Lap u +- sinh 2u at the centre
    errors: list[float]
    orders: list[float]  # log2 of consecutive error ratios (eps halving)

    @property
    def order(self) -> float:
        return min(self.orders) if self.orders else math.nan


def stencil_residual(u_field: Callable[[float, float], float], geometry, eps: float,
                     center=(0.0, 0.0)) -> float:
    """Flower residual at a vertex whose neighbours sample u at spacing eps."""
    geometry = Geometry(geometry)
    q = math.sqrt((1.0 - eps) * (1.0 + eps))
    ctx = EllipticContext(q)
    x0, y0 = center
    u0 = ctx.K - u_field(x0, y0)
    nbrs = np.array([ctx.K - u_field(x0 + eps * dx, y0 + eps * dy) for dx, dy in _STENCIL])
    th = theta(u0, nbrs, geometry, ctx)
    return float(np.sum(th) - 2.0 * math.pi * orientation(u0, ctx))


def limit_operator(u_field, geometry, center=(0.0, 0.0), h: float = 1e-3) -> float:
    """Lap u + sinh 2u (sphere) or Lap u - sinh 2u (hyperbolic) at the centre.

    The Laplacian uses a fourth-order 9-point-in-line stencil, accurate to far
    below the discretisation errors being measured.
    """
    geometry = Geometry(geometry)
    x0, y0 = center
    w = (-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12)
    offs = (-2, -1, 0, 1, 2)
    uxx = sum(c * u_field(x0 + k * h, y0) for c, k in zip(w, offs)) / h**2
    uyy = sum(c * u_field(x0, y0 + k * h) for c, k in zip(w, offs)) / h**2
    s = math.sinh(2.0 * u_field(x0, y0))
    return uxx + uyy + (s if geometry is Geometry.SPHERE else -s)


def sinh_gordon_order_check(u_field, geometry, eps_list=(0.08, 0.04, 0.02, 0.01),
                            center=(0.0, 0.0), limit: float | None = None) -> OrderCheck:
    """Measure how fast the normalized flower residual approaches the PDE."""
    geometry = Geometry(geometry)
    eps = sorted((float(e) for e in eps_list), reverse=True)
    if len(eps) < 2 or eps[-1] <= 0 or eps[0] >= 1:
        raise ValueError("need at least two eps values in (0, 1)")
    C = CALIBRATION[geometry]
    normalized = [stencil_residual(u_field, geometry, e, center) / (C * e * e) for e in eps]
    if limit is None:
        limit = limit_operator(u_field, geometry, center)
    errors = [abs(v - limit) for v in normalized]
    # Errors at roundoff level carry no order information.
    floor = ROUNDOFF * max(1.0, abs(limit))
    orders = []
    for (e0, r0), (e1, r1) in zip(zip(eps, errors), zip(eps[1:], errors[1:])):
        if r1 <= floor or r0 <= floor:
            orders.append(math.inf)
            continue
        orders.append(math.log(r0 / r1) / math.log(e0 / e1))
    finite = [o for o in orders if math.isfinite(o)]
    if any(o <= 0 for o in finite):
        raise LimitRegimeError(f"errors do not decrease with eps: {errors}")
    return OrderCheck(eps, normalized, limit, errors, orders)
