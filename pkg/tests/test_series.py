import math

import mpmath
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from gpyweight.series import (
    FG_double_sum,
    FG_series,
    InsufficientPrecisionError,
    polish_zero,
    vandermonde_F,
    vandermonde_G,
)
from gpyweight.specfun import zero


def test_ratio_is_the_eigenvalue_m3():
    ev = FG_series(3, 1, 256)
    alpha = zero(3, 1).value
    assert float(ev.ratio) == pytest.approx(16 / alpha**2, rel=1e-8)
    assert ev.F > 0 and ev.G > 0
    assert ev.terms_used > 0 and ev.precision_bits == 256


def test_single_and_double_sums_agree():
    for m in (0, 4, 10):
        ev = FG_series(m, 1, 256)
        F, G = FG_double_sum(m, ev.b, 70, 256)
        with mpmath.workprec(256):
            assert abs(F / ev.F - 1) < mpmath.mpf(2) ** -200
            assert abs(G / ev.G - 1) < mpmath.mpf(2) ** -200


def test_F_and_G_against_quadrature():
    m = 2
    ev = FG_series(m, 1, 128)
    b = float(ev.b)

    def q(x):
        return sum((-b) ** j * x**j / (math.factorial(j) * math.factorial(m + j)) for j in range(60))

    def dq(x):
        return sum((-b) ** j * j * x ** (j - 1) / (math.factorial(j) * math.factorial(m + j)) for j in range(1, 60))

    F, _ = integrate.quad(lambda x: (m + 1) * x**m * q(x) ** 2, 0, 1, epsrel=1e-12)
    G, _ = integrate.quad(lambda x: x ** (m + 1) * dq(x) ** 2, 0, 1, epsrel=1e-12)
    assert float(ev.F) == pytest.approx(F, rel=1e-8)
    assert float(ev.G) == pytest.approx(G, rel=1e-8)


def test_binomial_identities_exact():
    for m in range(31):
        for nu in range(31):
            assert vandermonde_F(m, nu) and vandermonde_G(m, nu)


@given(st.integers(0, 200), st.integers(0, 200))
def test_binomial_identities_property(m, nu):
    assert vandermonde_F(m, nu) and vandermonde_G(m, nu)


def test_cancellation_grows_with_m():
    c = [FG_series(m, 1, 512).cancellation for m in (5, 10, 15, 20)]
    assert all(a < b for a, b in zip(c, c[1:]))


@pytest.mark.parametrize("m", [2, 9, 16])
def test_precision_doubling_is_stable(m):
    a = FG_series(m, 2, 256)
    b = FG_series(m, 2, 512)
    assert float(abs(a.ratio / b.ratio - 1)) <= 1e-10


def test_insufficient_precision_is_signalled():
    with pytest.raises(InsufficientPrecisionError):
        FG_series(60, 5, 64)


def test_arguments_checked():
    with pytest.raises(ValueError):
        FG_series(61, 1, 256)
    with pytest.raises(ValueError):
        FG_series(3, 6, 256)
    with pytest.raises(ValueError):
        FG_series(3, 1, 32)


def test_polished_zero_against_mpmath():
    with mpmath.workprec(300):
        ref = mpmath.besseljzero(7, 2)
        got = polish_zero(7, 2, 300)
        assert abs(got - ref) < mpmath.mpf(2) ** -290
