"""Jacobi elliptic functions of real argument and the ring-pattern angle function.

All evaluation for a fixed modulus ``q`` goes through an :class:`EllipticContext`,
which caches the AGM sequence, the quarter periods and the piecewise Chebyshev
representation of the potential ``F``.

For ``q`` within ``Q1_THRESHOLD`` of 1 the context switches to the circle-pattern
limit, where ``sn = tanh``, ``cn = dn = sech`` and ``g = arctan sinh``.
"""
from __future__ import annotations

import math

import numpy as np
from numpy.polynomial import Chebyshev
from scipy.special import spence

Q1_THRESHOLD = 1e-12

# Catalan's constant, Im Li2(i).
_CATALAN = 0.915965594177219015054603514932384110774


def complementary_modulus(q: float) -> float:
    """sqrt(1 - q^2) without cancellation near q = 1."""
    return math.sqrt((1.0 - q) * (1.0 + q))


def _agm_sequence(q: float) -> tuple[np.ndarray, np.ndarray]:
    a, b, c = 1.0, complementary_modulus(q), q
    a_seq, c_seq = [a], [c]
    for _ in range(64):
        if abs(c) <= 1e-17 * a:
            break
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        a_seq.append(a)
        c_seq.append(c)
    return np.array(a_seq), np.array(c_seq)


def complete_K(q: float) -> float:
    """Quarter period K(q) = pi / (2 AGM(1, q')) for 0 < q < 1."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"complete_K needs 0 < q < 1, got {q!r}")
    a_seq, _ = _agm_sequence(q)
    return math.pi / (2.0 * a_seq[-1])


class EllipticContext:
    """Immutable evaluation context for modulus ``q`` in (0, 1].

    Attributes
    ----------
    q : float
        Modulus.
    qp : float
        Complementary modulus sqrt(1 - q^2).
    K, Kprime : float
        Real and imaginary quarter periods. ``K`` is ``inf`` in q1 mode.
    q1_mode : bool
        True when hyperbolic-function closed forms are used.
    """

    def __init__(self, q: float, q1_threshold: float = Q1_THRESHOLD):
        q = float(q)
        if not 0.0 < q <= 1.0 or not math.isfinite(q):
            raise ValueError(f"modulus must satisfy 0 < q <= 1, got {q!r}")
        self.q = q
        self.q1_mode = q == 1.0 or q > 1.0 - q1_threshold
        if self.q1_mode:
            self.qp = 0.0
            self.K = math.inf
            self.Kprime = math.pi / 2
            self._a = self._c = None
        else:
            self.qp = complementary_modulus(q)
            self._a, self._c = _agm_sequence(q)
            self.K = math.pi / (2.0 * self._a[-1])
            # K(q') directly; q' may be tiny, K(0) = pi/2.
            self.Kprime = math.pi / 2 if self.qp == 0.0 else math.pi / (2.0 * _agm_sequence(self.qp)[0][-1])
        self._F_panels = None

    def __repr__(self) -> str:
        return f"EllipticContext(q={self.q!r})"

    # -- Jacobi functions -------------------------------------------------

    def jacobi(self, x):
        """Return (sn, cn, dn) at real ``x`` (scalar or array)."""
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise ValueError("jacobi needs finite arguments")
        if self.q1_mode:
            sech = 1.0 / np.cosh(x)
            return np.tanh(x), sech, sech.copy()
        four_k = 4.0 * self.K
        x = x - four_k * np.round(x / four_k)
        a, c = self._a, self._c
        n = len(a) - 1
        phi = (2.0 ** n) * a[n] * x
        for j in range(n, 0, -1):
            phi = 0.5 * (phi + np.arcsin(c[j] / a[j] * np.sin(phi)))
        sn = np.sin(phi)
        cn = np.cos(phi)
        # dn^2 = q'^2 + q^2 cn^2 avoids the cancellation in 1 - q^2 sn^2.
        dn = np.sqrt(self.qp ** 2 + (self.q * cn) ** 2)
        return sn, cn, dn

    # -- angle function g and its derivatives ------------------------------

    def g(self, x):
        """Monotone angle function, g(0) = 0, g(x + 4K) = g(x) + pi."""
        x = np.asarray(x, dtype=float)
        if self.q1_mode:
            return np.arctan(np.sinh(x))
        four_k = 4.0 * self.K
        m = np.round(x / four_k)
        sn, cn, dn = self.jacobi(0.5 * (x - four_k * m))
        return np.arctan2((1.0 + self.q) * sn, cn * dn) + math.pi * m

    def g_prime(self, x):
        """g'(x) = (dn x + q cn x) / 2."""
        _, cn, dn = self.jacobi(x)
        return 0.5 * (dn + self.q * cn)

    def g_prime_half_argument(self, x):
        """g'(x) = (1+q)/2 (1 - q sn^2(x/2)) / (1 + q sn^2(x/2)); independent form."""
        sn, _, _ = self.jacobi(0.5 * np.asarray(x, dtype=float))
        s2 = sn * sn
        return 0.5 * (1.0 + self.q) * (1.0 - self.q * s2) / (1.0 + self.q * s2)

    def g_second(self, x):
        """g''(x) = -q sn x (dn x + q cn x) / 2."""
        sn, cn, dn = self.jacobi(x)
        return -0.5 * self.q * sn * (dn + self.q * cn)

    # -- potential F ------------------------------------------------------

    def F_second(self, x):
        return self.g_prime(x)

    def F(self, x):
        """Even convex antiderivative of g with F(0) = 0."""
        x = np.asarray(x, dtype=float)
        if self.q1_mode:
            return _dilog_im(x) + _dilog_im(-x) - 2.0 * _CATALAN
        K = self.K
        s = np.abs(x)
        m = np.floor(s / (4.0 * K))
        y = s - 4.0 * K * m
        upper = y > 2.0 * K
        y_base = np.where(upper, 4.0 * K - y, y)
        out = self._F_base(y_base)
        out = np.where(upper, out + math.pi * (y - 2.0 * K), out)
        # F(y + 4Km) = F(y) + m pi y + 2 pi K m^2.
        return out + m * math.pi * y + 2.0 * math.pi * K * m * m

    def _F_base(self, y):
        """F on [0, 2K] from the cached panel interpolants."""
        edges, pieces, offsets = self._panels()
        shape = np.shape(y)
        y = np.atleast_1d(y).ravel()
        idx = np.clip(np.searchsorted(edges, y, side="right") - 1, 0, len(pieces) - 1)
        out = np.empty_like(y)
        for i, piece in enumerate(pieces):
            sel = idx == i
            if np.any(sel):
                out[sel] = (piece(y[sel]) - piece(edges[i])) + offsets[i]
        return out.reshape(shape)

    def _panels(self):
        if self._F_panels is None:
            self._F_panels = _build_F_panels(self)
        return self._F_panels


_PANEL_DEGREE = 36


def _build_F_panels(ctx: EllipticContext):
    # Panel width bounded by K/4 and by K' (distance of the nearest complex
    # singularity of g), so each Chebyshev piece converges geometrically fast.
    two_k = 2.0 * ctx.K
    width = min(ctx.K / 4.0, ctx.Kprime)
    n_panels = max(8, int(math.ceil(two_k / width)))
    edges = np.linspace(0.0, two_k, n_panels + 1)
    pieces, offsets = [], []
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        g_piece = Chebyshev.interpolate(ctx.g, _PANEL_DEGREE, domain=[a, b])
        piece = g_piece.integ(lbnd=a)
        pieces.append(piece)
        offsets.append(total)
        total += float(piece(b) - piece(a))
    return edges, pieces, np.array(offsets)


def _dilog_im(x):
    """Im Li2(i e^x) = int_{-inf}^x arctan(e^u) du."""
    return np.imag(spence(1.0 - 1j * np.exp(x)))


def sn_complex(z, ctx: EllipticContext):
    """sn at complex argument via the real-argument addition formula.

    Uses functions of modulus q at Re z and of modulus q' at Im z; intended for
    cross-checks, not for the solver path.
    """
    if ctx.q1_mode:
        return np.tanh(np.asarray(z, dtype=complex))
    z = np.asarray(z, dtype=complex)
    s, c, d = ctx.jacobi(z.real)
    s1, c1, d1 = EllipticContext(ctx.qp).jacobi(z.imag) if ctx.qp > 0 else (
        np.sin(z.imag), np.cos(z.imag), np.ones_like(z.imag))
    den = c1 * c1 + (ctx.q * s * s1) ** 2
    return (s * d1 + 1j * c * d * s1 * c1) / den


# Module-level functional API --------------------------------------------------

def jacobi(x, ctx: EllipticContext):
    return ctx.jacobi(x)


def g(x, ctx: EllipticContext):
    return ctx.g(x)


def g_prime(x, ctx: EllipticContext):
    return ctx.g_prime(x)


def F(x, ctx: EllipticContext):
    return ctx.F(x)
