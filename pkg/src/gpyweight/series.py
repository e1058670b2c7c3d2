"""Power-series route to the eigenvalue, in arbitrary precision.

With q(x) = sum_j (-b)**j x**j / (j! (m+j)!) and b = alpha_{m,r}**2 / 4,

    F = (m+1) int x**m q**2 = 2b    sum_nu (-b)**nu (2m+2nu+1)! / ((m+nu)! (m+nu+2)! (2m+nu+1)! nu!)
    G = int x**(m+1) q'**2  = b**2  sum_nu (-b)**nu (2m+2nu+2)! / ((m+nu+1)! (m+nu+2)! (2m+nu+2)! nu!)

and F/G must equal 4(m+1)/alpha**2.  The single sums come from the double
sums over (j, l) through two Vandermonde convolutions.  The terms alternate
and grow to roughly exp(2 sqrt b) before decaying, so the decimal digits lost
to cancellation are reported alongside the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath

from .specfun import zero

__all__ = [
    "SeriesEval",
    "InsufficientPrecisionError",
    "FG_series",
    "FG_double_sum",
    "polish_zero",
    "vandermonde_F",
    "vandermonde_G",
]


class InsufficientPrecisionError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SeriesEval:
    m: int
    r: int
    b: mpmath.mpf
    F: mpmath.mpf
    G: mpmath.mpf
    ratio: mpmath.mpf
    terms_used: int
    precision_bits: int
    cancellation: float

    @property
    def eigenvalue(self) -> mpmath.mpf:
        """4(m+1)/alpha**2 = (m+1)/b at the same precision."""
        with mpmath.workprec(self.precision_bits):
            return (self.m + 1) / self.b


def _bessel_series(m: int, x):
    """J_m(x) and J_{m+1}(x) from the ascending series at the current precision."""
    h = x / 2
    h2 = -h * h
    out = []
    for nu in (m, m + 1):
        term = h**nu / mpmath.factorial(nu)
        total = term
        j = 0
        while True:
            j += 1
            term = term * h2 / (j * (nu + j))
            total += term
            if j > abs(h) and abs(term) < mpmath.eps * abs(total):
                break
        out.append(total)
    return out


def polish_zero(m: int, r: int, precision_bits: int) -> mpmath.mpf:
    """alpha_{m,r} to ``precision_bits`` by Newton on the ascending series.

    The float zero seeds the iteration; guard bits cover the series cancellation.
    """
    seed = zero(m, r).value
    guard = int(1.45 * seed) + 20
    with mpmath.workprec(precision_bits + guard):
        a = mpmath.mpf(seed)
        tol = mpmath.ldexp(a, -precision_bits - 4)
        for _ in range(60):
            jm, jm1 = _bessel_series(m, a)
            deriv = m / a * jm - jm1
            step = jm / deriv
            a -= step
            if abs(step) <= tol:
                break
        else:
            raise ArithmeticError("Newton polish of the Bessel zero did not converge")
    with mpmath.workprec(precision_bits):
        return +a


def _alternating_sum(term_of, b, bits: int):
    """Sum sum_nu term_of(nu) (-b)**nu, returning (sum, terms, max |term|)."""
    total = mpmath.mpf(0)
    peak = mpmath.mpf(0)
    floor = mpmath.ldexp(1, -bits)
    nu = 0
    power = mpmath.mpf(1)
    settle = 2 * math.isqrt(int(b) + 1) + 4
    while True:
        t = term_of(nu) * power
        total += t
        peak = max(peak, abs(t))
        nu += 1
        power *= -b
        if nu > settle and abs(t) <= floor * abs(total):
            return total, nu, peak
        if nu > 100_000:
            raise ArithmeticError("power series did not truncate")


def FG_series(m: int, r: int = 1, precision_bits: int = 256) -> SeriesEval:
    if isinstance(m, bool) or not isinstance(m, int) or not 0 <= m <= 60:
        raise ValueError("m must be an integer in [0, 60]")
    if isinstance(r, bool) or not isinstance(r, int) or not 1 <= r <= 5:
        raise ValueError("r must be an integer in [1, 5]")
    if not 64 <= precision_bits <= 4096:
        raise ValueError("precision_bits must lie in [64, 4096]")
    alpha = polish_zero(m, r, precision_bits)
    fac = mpmath.factorial
    with mpmath.workprec(precision_bits):
        b = alpha * alpha / 4

        def f_term(nu):
            return fac(2 * m + 2 * nu + 1) / (fac(m + nu) * fac(m + nu + 2) * fac(2 * m + nu + 1) * fac(nu))

        def g_term(nu):
            return fac(2 * m + 2 * nu + 2) / (fac(m + nu + 1) * fac(m + nu + 2) * fac(2 * m + nu + 2) * fac(nu))

        n_sum, n_terms, n_peak = _alternating_sum(f_term, b, precision_bits)
        d_sum, d_terms, d_peak = _alternating_sum(g_term, b, precision_bits)
        if n_sum == 0 or d_sum == 0:
            raise InsufficientPrecisionError("series sum cancelled to zero")
        cancel = max(
            float(mpmath.log10(n_peak / abs(n_sum))),
            float(mpmath.log10(d_peak / abs(d_sum))),
        )
        if cancel >= precision_bits * math.log10(2) - 10:
            raise InsufficientPrecisionError(
                f"cancellation of {cancel:.1f} digits leaves fewer than 10 at {precision_bits} bits"
            )
        F = 2 * b * n_sum
        G = b * b * d_sum
        return SeriesEval(
            m=m, r=r, b=b, F=F, G=G, ratio=F / G,
            terms_used=max(n_terms, d_terms), precision_bits=precision_bits, cancellation=cancel,
        )


def FG_double_sum(m: int, b, terms: int, precision_bits: int = 256):
    """F and G from the double sums over (j, l), both indices below ``terms``."""
    fac = mpmath.factorial
    with mpmath.workprec(precision_bits):
        b = mpmath.mpf(b)
        F = mpmath.mpf(0)
        G = mpmath.mpf(0)
        for j in range(terms):
            for ell in range(terms):
                p = (-b) ** (j + ell) / (fac(j) * fac(ell) * (m + j + ell + 2))
                F += p / (fac(m + j) * fac(m + ell + 1))
                G += p / (fac(m + j + 1) * fac(m + ell + 1))
        return 2 * b * F, b * b * G


def vandermonde_F(m: int, nu: int) -> bool:
    """sum_j C(m+nu, nu-j) C(m+nu+1, j) == C(2m+2nu+1, nu), in exact integers."""
    lhs = sum(math.comb(m + nu, nu - j) * math.comb(m + nu + 1, j) for j in range(nu + 1))
    return lhs == math.comb(2 * m + 2 * nu + 1, nu)


def vandermonde_G(m: int, nu: int) -> bool:
    """sum_j C(m+nu+1, nu-j) C(m+nu+1, j) == C(2m+2nu+2, nu), in exact integers."""
    lhs = sum(math.comb(m + nu + 1, nu - j) * math.comb(m + nu + 1, j) for j in range(nu + 1))
    return lhs == math.comb(2 * m + 2 * nu + 2, nu)
