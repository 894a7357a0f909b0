from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special

from ringforge.elliptic import EllipticContext, complete_K, sn_complex

# Reference values computed with mpmath at 30 digits.  The angle function uses
# the closed form g(x) = (am x + arcsin(q sn x)) / 2, which follows from
# int dn = am and int q cn = arcsin(q sn); F is adaptive quadrature of that g.
K_REF = {0.5: 1.6857503548125960429, 0.8: 1.9953027776647293877, 0.99: 3.356600523361192376}
KP_REF = {0.5: 2.1565156474996432354, 0.8: 1.750753802915752529, 0.99: 1.5786997420390117213}
JACOBI_REF_08 = {
    0.7: (0.61875564895254537359, 0.78558350726661416802, 0.8688903993077384893),
    -3.1: (-0.73591991317878840644, -0.67706859429966513102, 0.80832543204307985062),
}
G_REF_08 = {0.5: 0.43571588134816429951, 1.3: 0.97136476269261012622, 3.0: 1.4582875244606805335,
            5.0: 1.6859837247765806617, -2.2: -1.3056959747349804449, 9.7: 4.2978186543643906036}
F_REF_08 = {1.0: 0.42344985429584773415, 3.0: 2.8437855645507500004, -2.5: 2.1345212930952340944,
            7.3: 10.599504588342461183}
F_2K_08 = 4.3474700510791801316
G_REF_099 = {0.4: 0.38789065693777747032, 2.5: 1.4049776798937198765, 6.0: 1.5669234074383695636}
F_REF_099 = {0.4: 0.078576098957975960535, 2.5: 2.2528205044731037094, 6.0: 7.5899994746488325452}
F_REF_Q1 = {0.3: 0.044667465437946917499, 1.7: 1.2024507885157944018, -4.0: 4.4878840313869579191}

moduli = st.sampled_from([0.5, 0.8, 0.99])


def g_oracle(x, q):
    """Closed form of g through scipy's independent Jacobi implementation."""
    sn, cn, _, ph = special.ellipj(x, q * q)
    return 0.5 * (ph + np.arcsin(q * sn))


# -- complete_K --------------------------------------------------------------------

@pytest.mark.parametrize("q", [0.5, 0.8, 0.99])
def test_complete_K_reference(q):
    assert complete_K(q) == pytest.approx(K_REF[q], rel=1e-14)
    ctx = EllipticContext(q)
    assert ctx.Kprime == pytest.approx(KP_REF[q], rel=1e-14)


@pytest.mark.parametrize("q", [0.5, 0.8])
def test_complete_K_against_quadrature(q):
    val, _ = integrate.quad(lambda t: 1.0 / math.sqrt(1 - (q * math.sin(t)) ** 2), 0, math.pi / 2,
                            epsabs=1e-14, epsrel=1e-13, limit=200)
    assert abs(complete_K(q) - val) < 1e-12


def test_complete_K_small_modulus():
    assert complete_K(1e-9) == pytest.approx(math.pi / 2, rel=1e-15)


@pytest.mark.parametrize("q", [0.0, -0.1, 1.0, 1.5])
def test_complete_K_domain(q):
    with pytest.raises(ValueError):
        complete_K(q)


@pytest.mark.parametrize("q", [0.0, 1.0000001, math.nan])
def test_context_rejects_bad_modulus(q):
    with pytest.raises(ValueError):
        EllipticContext(q)


# -- Jacobi functions --------------------------------------------------------------

@pytest.mark.parametrize("x", sorted(JACOBI_REF_08))
def test_jacobi_reference(x):
    got = EllipticContext(0.8).jacobi(x)
    assert np.allclose(got, JACOBI_REF_08[x], atol=1e-15, rtol=0)


@pytest.mark.parametrize("q", [0.5, 0.8, 0.99])
def test_jacobi_special_points(q):
    ctx = EllipticContext(q)
    assert np.allclose(ctx.jacobi(0.0), (0.0, 1.0, 1.0), atol=1e-16)
    sn, cn, dn = ctx.jacobi(ctx.K)
    assert sn == pytest.approx(1.0, abs=1e-15)
    assert abs(cn) < 1e-15
    assert dn == pytest.approx(math.sqrt(1 - q * q), abs=1e-15)


def test_jacobi_q1_mode():
    ctx = EllipticContext(1.0)
    assert ctx.q1_mode and ctx.Kprime == math.pi / 2 and math.isinf(ctx.K)
    sn, cn, dn = ctx.jacobi(1.0)
    assert (sn, cn, dn) == (math.tanh(1.0), 1 / math.cosh(1.0), 1 / math.cosh(1.0))


def test_jacobi_rejects_nonfinite():
    with pytest.raises(ValueError):
        EllipticContext(0.8).jacobi([0.0, math.inf])


@given(q=moduli, x=st.floats(-40, 40))
def test_jacobi_identities_and_scipy(q, x):
    ctx = EllipticContext(q)
    sn, cn, dn = ctx.jacobi(x)
    assert abs(sn * sn + cn * cn - 1) < 1e-12
    assert abs(dn * dn + q * q * sn * sn - 1) < 1e-12
    ref = special.ellipj(x, q * q)[:3]
    assert np.allclose((sn, cn, dn), ref, atol=1e-11)


@given(q=moduli, x=st.floats(-10, 10), k=st.integers(-3, 3))
def test_jacobi_period(q, x, k):
    ctx = EllipticContext(q)
    assert np.allclose(ctx.jacobi(x + 4 * k * ctx.K), ctx.jacobi(x), atol=1e-12)


# -- g -----------------------------------------------------------------------------

@pytest.mark.parametrize("x", sorted(G_REF_08))
def test_g_reference(x):
    assert EllipticContext(0.8).g(x) == pytest.approx(G_REF_08[x], abs=1e-14)


@pytest.mark.parametrize("x", sorted(G_REF_099))
def test_g_reference_near_one(x):
    assert EllipticContext(0.99).g(x) == pytest.approx(G_REF_099[x], abs=1e-14)


@pytest.mark.parametrize("q", [0.5, 0.8, 0.99])
def test_g_normalization(q):
    ctx = EllipticContext(q)
    assert ctx.g(0.0) == 0.0
    assert ctx.g(2 * ctx.K) == pytest.approx(math.pi / 2, abs=1e-15)
    assert ctx.g_prime(0.0) == pytest.approx((1 + q) / 2, abs=1e-15)
    assert ctx.g_prime(2 * ctx.K) == pytest.approx((1 - q) / 2, abs=1e-15)


def test_g_q1_closed_form():
    assert EllipticContext(1.0).g(1.0) == math.atan(math.sinh(1.0))
    near = EllipticContext(1 - 1e-13, q1_threshold=1e-14)
    assert near.g(1.0) == pytest.approx(math.atan(math.sinh(1.0)), abs=1e-10)


@given(q=moduli, x=st.floats(-30, 30))
def test_g_matches_scipy_closed_form(q, x):
    assert abs(EllipticContext(q).g(x) - g_oracle(x, q)) < 1e-11


@given(q=moduli, x=st.floats(-30, 30))
def test_g_oddness_and_quasi_period(q, x):
    ctx = EllipticContext(q)
    assert abs(ctx.g(x) + ctx.g(-x)) < 1e-12
    assert abs(ctx.g(x + 4 * ctx.K) - ctx.g(x) - math.pi) < 1e-10


@pytest.mark.parametrize("q", [0.5, 0.8, 0.99])
def test_g_strictly_increasing(q):
    ctx = EllipticContext(q)
    x = np.linspace(-12 * ctx.K, 12 * ctx.K, 20001)
    assert np.all(np.diff(ctx.g(x)) > 0)


@given(q=moduli, x=st.floats(-20, 20))
def test_g_prime_forms_agree(q, x):
    ctx = EllipticContext(q)
    assert abs(ctx.g_prime(x) - ctx.g_prime_half_argument(x)) < 1e-13
    assert ctx.g_prime(x) > 0


@pytest.mark.parametrize("q", [0.8, 0.99])
def test_g_prime_finite_difference_order(q):
    ctx = EllipticContext(q)
    x = np.linspace(-3 * ctx.K, 3 * ctx.K, 37) + 0.123
    errs = []
    for h in (0.04, 0.02, 0.01):
        fd = (ctx.g(x + h) - ctx.g(x - h)) / (2 * h)
        errs.append(np.max(np.abs(fd - ctx.g_prime(x))))
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) >= 1.9
    assert errs[-1] < 1e-4
    h = 1e-5
    assert np.max(np.abs((ctx.g(x + h) - ctx.g(x - h)) / (2 * h) - ctx.g_prime(x))) < 1e-8


@pytest.mark.parametrize("q", [0.5, 0.8, 0.99])
def test_g_second_sign(q):
    ctx = EllipticContext(q)
    left = np.linspace(0, 2 * ctx.K, 500)
    right = np.linspace(2 * ctx.K, 4 * ctx.K, 500)
    assert np.all(ctx.g_second(left) <= 1e-15)
    assert np.all(ctx.g_second(right) >= -1e-15)
    h = 1e-5
    fd = (ctx.g_prime(left + h) - ctx.g_prime(left - h)) / (2 * h)
    assert np.max(np.abs(fd - ctx.g_second(left))) < 1e-8


# -- F -----------------------------------------------------------------------------

@pytest.mark.parametrize("x", sorted(F_REF_08))
def test_F_reference(x):
    assert EllipticContext(0.8).F(x) == pytest.approx(F_REF_08[x], abs=1e-12)


@pytest.mark.parametrize("x", sorted(F_REF_099))
def test_F_reference_near_one(x):
    assert EllipticContext(0.99).F(x) == pytest.approx(F_REF_099[x], abs=1e-12)


@pytest.mark.parametrize("x", sorted(F_REF_Q1))
def test_F_q1_dilogarithm(x):
    assert EllipticContext(1.0).F(x) == pytest.approx(F_REF_Q1[x], abs=1e-13)


def test_F_at_2K_against_quadrature():
    ctx = EllipticContext(0.8)
    assert ctx.F(2 * ctx.K) == pytest.approx(F_2K_08, abs=1e-12)
    val, _ = integrate.quad(lambda t: g_oracle(t, 0.8), 0, 2 * ctx.K, epsabs=1e-13, epsrel=1e-13, limit=200)
    assert abs(ctx.F(2 * ctx.K) - val) < 1e-10


def test_F_scalar_and_array_shapes():
    ctx = EllipticContext(0.8)
    assert np.shape(ctx.F(1.0)) == ()
    assert ctx.F(np.zeros((2, 3))).shape == (2, 3)
    assert ctx.F(0.0) == 0.0


@given(q=moduli, x=st.floats(-25, 25))
def test_F_even_and_derivative(q, x):
    ctx = EllipticContext(q)
    assert abs(ctx.F(x) - ctx.F(-x)) < 1e-11 * max(1.0, abs(ctx.F(x)))
    h = 1e-4
    fd = (ctx.F(x + h) - ctx.F(x - h)) / (2 * h)
    assert abs(fd - ctx.g(x)) < 1e-7 * max(1.0, abs(x))


@pytest.mark.parametrize("q", [0.5, 0.8, 0.99])
def test_F_convex(q):
    ctx = EllipticContext(q)
    x = np.linspace(-8 * ctx.K, 8 * ctx.K, 4001)
    assert np.all(ctx.F_second(x) > 0)
    F = ctx.F(x)
    assert np.all(F[:-2] + F[2:] - 2 * F[1:-1] > 0)


def test_F_q1_is_limit_of_elliptic_branch():
    near = EllipticContext(1 - 1e-13, q1_threshold=1e-14)
    exact = EllipticContext(1.0)
    x = np.linspace(-5, 5, 41)
    assert np.max(np.abs(near.F(x) - exact.F(x))) < 1e-6


# -- complex sn cross-check ------------------------------------------------------

@given(x=st.floats(-8, 8))
def test_g_is_phase_of_shifted_sn(x):
    """g(x) = pi/2 - arg sn((x + iK')/2) modulo pi."""
    ctx = EllipticContext(0.8)
    s = sn_complex((x + 1j * ctx.Kprime) / 2, ctx)
    diff = math.pi / 2 - np.angle(s) - ctx.g(x)
    assert abs(math.remainder(diff, math.pi)) < 1e-11
