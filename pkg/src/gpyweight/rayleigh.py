"""The weight-polynomial ratio S(P, k) = A_k / B_k.

Polynomials are stored in the shifted basis

    P(x) = sum_l c_l * x**(k + l) / (k + l)!,   l >= 0,

so that P^(k-1)(x) = sum_l c_l x**(l+1)/(l+1)! and P^(k)(x) = sum_l c_l x**l/l!.
Substituting into the Beta integral gives closed double sums for A_k and B_k,
evaluated here exactly over the rationals (the source of truth) or in
log-scaled floating point.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Literal, Mapping, Optional

import numpy as np
from scipy import integrate

from .quadrature import dyadic_grid
from .specfun import KParams

EXACT_MAX_EXCESS_DEGREE = 2000


class ZeroPolynomialError(ValueError):
    pass


@dataclass(frozen=True)
class WeightPoly:
    """Admissible weight polynomial with exact coefficients in the shifted basis."""

    k: int
    terms: Mapping[int, Fraction] = field(hash=False)

    def __post_init__(self):
        KParams(self.k)
        clean = {}
        for ell, c in dict(self.terms).items():
            if isinstance(ell, bool) or not isinstance(ell, numbers.Integral) or ell < 0:
                raise ValueError(f"term index must be a non-negative integer, got {ell!r}")
            c = Fraction(c)
            if c != 0:
                clean[int(ell)] = c
        if not clean:
            raise ZeroPolynomialError("weight polynomial has no nonzero coefficient")
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    @classmethod
    def monomial(cls, k: int, ell: int = 0) -> "WeightPoly":
        """P(x) = x**(k + ell)."""
        return cls(k, {ell: Fraction(math.factorial(k + ell))})

    @property
    def degree(self) -> int:
        return self.k + max(self.terms)

    def scaled(self, c) -> "WeightPoly":
        c = Fraction(c)
        return WeightPoly(self.k, {ell: c * v for ell, v in self.terms.items()})

    def _eval(self, t, shift: int):
        """sum_l c_l t**(l+shift) / (l+shift)! in log-scaled floating point."""
        t = np.asarray(t, dtype=float)
        logt = np.log(np.where(t > 0, t, 1.0))
        out = np.zeros_like(t)
        for ell, c in self.terms.items():
            d = ell + shift
            sign = 1.0 if c > 0 else -1.0
            logc = _log_fraction(c) - math.lgamma(d + 1)
            if d == 0:
                out += sign * math.exp(logc)
            else:
                out += sign * np.exp(logc + d * logt) * (t > 0)
        return out

    def __call__(self, x):
        return self._eval(x, self.k)

    def q(self, x):
        """q(x) = P^(k-1)(1 - x) evaluated in floating point."""
        return self._eval(1.0 - np.asarray(x, dtype=float), 1)

    def dq(self, x):
        return -self._eval(1.0 - np.asarray(x, dtype=float), 0)


@dataclass(frozen=True)
class RatioBreakdown:
    A_exact: Optional[Fraction]
    B_exact: Optional[Fraction]
    ratio_exact: Optional[Fraction]
    A: float
    B: float
    ratio: float
    log_A: float
    log_B: float
    path: Literal["exact", "float"]


def euler_beta(m: int, n: int) -> Fraction:
    """Integral of x**n (1-x)**m over [0, 1], i.e. n! m! / (m+n+1)!."""
    if m < 0 or n < 0:
        raise ValueError("Beta integral exponents must be non-negative")
    return Fraction(math.factorial(n) * math.factorial(m), math.factorial(m + n + 1))


def _pair_sums(P: WeightPoly):
    """Integer numerators for A_k, B_k over the common denominators.

    Returns (a_num, b_num, den, scale) with
    A_k = a_num / (den_A * scale**2) and B_k = b_num / (den_B * scale**2).
    """
    k = P.k
    scale = math.lcm(*(c.denominator for c in P.terms.values()))
    ints = {ell: int(c * scale) for ell, c in P.terms.items()}
    items = list(ints.items())
    smax = 2 * max(ints)
    a_by_s: dict[int, int] = {}
    b_by_s: dict[int, int] = {}
    for l1, c1 in items:
        for l2, c2 in items:
            s = l1 + l2
            cc = c1 * c2
            a_by_s[s] = a_by_s.get(s, 0) + cc * math.comb(s + 2, l1 + 1)
            b_by_s[s] = b_by_s.get(s, 0) + cc * math.comb(s, l1)
    # A: denominator (k+s+1)!, B: (k+s)!; bring both to (k+smax+1)!
    top = k + smax + 1
    a_num = 0
    b_num = 0
    for s, v in a_by_s.items():
        a_num += v * _falling(top, top - (k + s + 1))
    for s, v in b_by_s.items():
        b_num += v * _falling(top, top - (k + s))
    den = math.factorial(top)
    return a_num, b_num, den, scale


def _falling(top: int, count: int) -> int:
    """top * (top-1) * ... (count factors); equals top! / (top-count)!."""
    return math.perm(top, count)


def _ratio_exact(P: WeightPoly) -> RatioBreakdown:
    if P.degree - P.k > EXACT_MAX_EXCESS_DEGREE:
        raise ValueError(f"exact path limited to degree <= k + {EXACT_MAX_EXCESS_DEGREE}")
    a_num, b_num, den, scale = _pair_sums(P)
    if b_num <= 0:
        raise ArithmeticError("B_k vanished for a nonzero polynomial")
    A = Fraction(a_num, den * scale * scale)
    B = Fraction(b_num, den * scale * scale)
    ratio = Fraction(a_num, b_num)
    return RatioBreakdown(
        A_exact=A,
        B_exact=B,
        ratio_exact=ratio,
        A=_safe_float(A),
        B=_safe_float(B),
        ratio=_safe_float(ratio),
        log_A=_log_fraction(A),
        log_B=_log_fraction(B),
        path="exact",
    )


def _log_fraction(f: Fraction) -> float:
    return math.log(abs(f.numerator)) - math.log(f.denominator)


def _safe_float(f: Fraction) -> float:
    """float(f), saturating to +-inf instead of raising on overflow."""
    try:
        return float(f)
    except OverflowError:
        return math.inf if f > 0 else -math.inf


def _signed_logsumexp(logs: list[float], signs: list[int]) -> tuple[int, float]:
    top = max(logs)
    total = math.fsum(s * math.exp(v - top) for v, s in zip(logs, signs))
    if total == 0:
        return 0, -math.inf
    return (1 if total > 0 else -1), top + math.log(abs(total))


def _ratio_float(P: WeightPoly) -> RatioBreakdown:
    k = P.k
    items = [(ell, 1 if c > 0 else -1, _log_fraction(c)) for ell, c in P.terms.items()]
    la, sa, lb, sb = [], [], [], []
    for l1, s1, g1 in items:
        for l2, s2, g2 in items:
            s = l1 + l2
            sign = s1 * s2
            base = g1 + g2
            la.append(base + _log_comb(s + 2, l1 + 1) - math.lgamma(k + s + 2))
            lb.append(base + _log_comb(s, l1) - math.lgamma(k + s + 1))
            sa.append(sign)
            sb.append(sign)
    sgn_a, log_a = _signed_logsumexp(la, sa)
    sgn_b, log_b = _signed_logsumexp(lb, sb)
    if sgn_b <= 0:
        raise ArithmeticError("B_k vanished for a nonzero polynomial")
    return RatioBreakdown(
        A_exact=None,
        B_exact=None,
        ratio_exact=None,
        A=sgn_a * math.exp(log_a) if log_a > -745 else 0.0,
        B=math.exp(log_b) if log_b > -745 else 0.0,
        ratio=sgn_a * math.exp(log_a - log_b),
        log_A=log_a,
        log_B=log_b,
        path="float",
    )


def _log_comb(a: int, b: int) -> float:
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


def ratio_of_poly(P: WeightPoly, path: Literal["exact", "float"] = "exact") -> RatioBreakdown:
    """A_k, B_k and S(P, k) = A_k / B_k for an admissible weight polynomial."""
    if path == "exact":
        return _ratio_exact(P)
    if path == "float":
        return _ratio_float(P)
    raise ValueError(f"unknown path {path!r}")


def monomial_ratio(k: int, ell: int) -> Fraction:
    """S(x**(k+ell), k) = 2(2 ell + 1) / ((ell + 1)(k + 2 ell + 1))."""
    return Fraction(2 * (2 * ell + 1), (ell + 1) * (k + 2 * ell + 1))


def best_monomial(k: int, ell_max: Optional[int] = None) -> tuple[int, Fraction]:
    """Best exponent shift ell in [0, ell_max] for P = x**(k+ell), exact path."""
    if ell_max is None:
        ell_max = math.ceil(3 * math.sqrt(k))
    best = None
    for ell in range(ell_max + 1):
        r = ratio_of_poly(WeightPoly.monomial(k, ell)).ratio_exact
        if best is None or r > best[1]:
            best = (ell, r)
    return best


def _derivative(q: Callable, x: np.ndarray) -> np.ndarray:
    h = 1e-4 * np.minimum(x, 1.0 - x)
    return (np.asarray(q(x + h)) - np.asarray(q(x - h))) / (2.0 * h)


def ratio_of_q(
    q: Callable,
    k: KParams | int,
    dq: Optional[Callable] = None,
    points: int = 1024,
) -> float:
    """(k-1) int x^(k-2) q^2 dx / int x^(k-1) q'^2 dx for q with q(1) = 0.

    ``q`` and the optional analytic derivative ``dq`` must accept numpy arrays.
    Without ``dq`` the derivative is taken by central differences.
    """
    kp = k if isinstance(k, KParams) else KParams(k)
    if points < 1000:
        raise ValueError("grid resolution must be at least 1000 points")
    grid = dyadic_grid(points)
    x, w = grid.nodes, grid.weights
    qx = np.asarray(q(x), dtype=float)
    q1 = float(np.asarray(q(np.array([1.0])))[0])
    if abs(q1) > 1e-8 * max(1.0, float(np.max(np.abs(qx)))):
        raise ValueError(f"q(1) = {q1} is not zero")
    dqx = np.asarray(dq(x), dtype=float) if dq is not None else _derivative(q, x)
    num = kp.n * np.sum(w * x**kp.m * qx**2)
    den = np.sum(w * x**kp.n * dqx**2)
    if not den > 0:
        raise ZeroDivisionError("denominator vanishes (q is constant)")
    return float(num / den)


def liouville_P_from_q(q: Callable, k: KParams | int, x: float) -> float:
    """P(x) = int_0^x q(1-t) (x-t)^(k-2) / (k-2)! dt by adaptive quadrature."""
    kp = k if isinstance(k, KParams) else KParams(k)
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0:
        return 0.0
    m = kp.m
    log_norm = math.lgamma(m + 1)

    def integrand(t):
        return float(q(1.0 - t)) * math.exp(m * math.log(x - t) - log_norm) if t < x else 0.0

    val, _ = integrate.quad(integrand, 0.0, x, epsabs=0.0, epsrel=1e-13, limit=200)
    return val
