"""Bessel functions of the first kind for integer order, their zeros, and
exact factorial helpers.

Two evaluation regimes are used for ``J_nu(x)``:

* an ascending power series, summed in exact fixed-point integer arithmetic so
  that the alternating cancellation for moderate ``x`` costs nothing, and
* Miller's backward recurrence normalised by ``J_0 + 2 sum J_2j = 1`` in the
  oscillatory / transition region.

All functions are pure; the only state is an ``lru_cache`` on the zero finder.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

__all__ = [
    "KParams",
    "BesselZero",
    "bessel_j",
    "bessel_j_prime",
    "log_bessel_j_reduced",
    "first_zero",
    "zero",
    "zeros",
    "log_factorial",
    "exact_binomial",
]

MAX_ORDER = 10**6
ZERO_ASYMPTOTIC_C = 1.8557571

_SERIES_X = 12.0
_FIXED_POINT_BITS = 200
_EXACT_PREFACTOR_MAX_ORDER = 1000
_RESCALE = 1e250
_LOG_RESCALE = math.log(_RESCALE)
_MILLER_TOL = 1e-13
_MILLER_MAX_DOUBLINGS = 8


@dataclass(frozen=True)
class KParams:
    """The integer triple (k, m, n) = (k, k-2, k-1)."""

    k: int

    def __post_init__(self):
        if not isinstance(self.k, numbers.Integral) or isinstance(self.k, bool):
            raise TypeError(f"k must be an integer, got {self.k!r}")
        if self.k < 3:
            raise ValueError(f"k must be >= 3, got {self.k}")

    @property
    def m(self) -> int:
        return self.k - 2

    @property
    def n(self) -> int:
        return self.k - 1


@dataclass(frozen=True)
class BesselZero:
    """r-th positive zero of J_order together with a sign-change bracket."""

    order: int
    index: int
    value: float
    bracket: tuple[float, float]


def _check_order(nu) -> int:
    if isinstance(nu, bool) or not isinstance(nu, numbers.Integral):
        raise TypeError(f"Bessel order must be an integer, got {nu!r}")
    nu = int(nu)
    if nu < 0:
        raise ValueError(f"Bessel order must be >= 0, got {nu}")
    if nu > MAX_ORDER:
        raise ValueError(f"Bessel order {nu} exceeds {MAX_ORDER}")
    return nu


def _check_arg(x) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"argument must be finite, got {x}")
    if x < 0:
        raise ValueError(f"argument must be >= 0, got {x}")
    return x


def _use_series(nu: int, x: float) -> bool:
    # Terms of the ascending series decrease from j=0 once x^2/4 <= nu+1.
    return x <= _SERIES_X or 0.25 * x * x <= nu + 1


# --------------------------------------------------------------------------
# ascending series
# --------------------------------------------------------------------------

def _series_sum_fixed(nu: int, x: float) -> tuple[int, int]:
    """Return (S, P) with S / 2**P = sum_j (-x^2/4)^j / (j! (nu+1)_j)."""
    a, d = x.as_integer_ratio()
    num = a * a
    den = 4 * d * d
    # the largest term is below exp(x) <= 2**(1.45 x); keep it inside the mantissa
    bits = _FIXED_POINT_BITS + int(1.45 * x)
    term = 1 << bits
    total = term
    z = 0.25 * x * x
    sign = 1
    j = 0
    while True:
        j += 1
        term = (term * num) // (den * j * (nu + j))
        sign = -sign
        if term == 0:
            break
        total += sign * term
        if j > z and term <= (abs(total) >> 80):
            break
    return total, bits


def _series_value(nu: int, x: float) -> float:
    s, bits = _series_sum_fixed(nu, x)
    if nu <= _EXACT_PREFACTOR_MAX_ORDER:
        a, d = x.as_integer_ratio()
        return float(Fraction(s * a**nu, (1 << bits) * (2 * d) ** nu * math.factorial(nu)))
    sign, logabs = _series_log(nu, x, s, bits)
    return sign * math.exp(logabs) if logabs > -745.0 else 0.0


def _series_log(nu: int, x: float, s: int, bits: int) -> tuple[int, float]:
    if s == 0:
        return 0, -math.inf
    logabs = math.log(abs(s)) - bits * math.log(2.0)
    logabs += nu * math.log(0.5 * x) - math.lgamma(nu + 1)
    return (1 if s > 0 else -1), logabs


# --------------------------------------------------------------------------
# Miller backward recurrence
# --------------------------------------------------------------------------

def _miller_start(nu: int, x: float) -> int:
    base = max(nu, math.ceil(x))
    return base + 40 + math.ceil(1.5 * math.sqrt(base))


def _miller_run(orders: tuple[int, ...], x: float, start: int) -> dict[int, tuple[int, float]]:
    """One backward sweep from ``start``; returns order -> (sign, log|J|)."""
    wanted = set(orders)
    recorded: dict[int, tuple[float, float]] = {}
    two_over_x = 2.0 / x
    p_next = 0.0
    p = 1e-30
    log_scale = 0.0
    norm = 0.0
    k = start
    if k in wanted:
        recorded[k] = (p, log_scale)
    if k % 2 == 0:
        norm += 2.0 * p
    while k > 0:
        p_prev = k * two_over_x * p - p_next
        p_next = p
        p = p_prev
        k -= 1
        if abs(p) > _RESCALE:
            p /= _RESCALE
            p_next /= _RESCALE
            norm /= _RESCALE
            log_scale += _LOG_RESCALE
        if k % 2 == 0:
            norm += p if k == 0 else 2.0 * p
        if k in wanted:
            recorded[k] = (p, log_scale)
    out = {}
    lognorm = math.log(abs(norm)) + log_scale
    signnorm = 1 if norm > 0 else -1
    for order in orders:
        value, scale = recorded[order]
        if value == 0.0:
            out[order] = (0, -math.inf)
        else:
            out[order] = (
                signnorm * (1 if value > 0 else -1),
                math.log(abs(value)) + scale - lognorm,
            )
    return out


def _to_float(sl: tuple[int, float]) -> float:
    sign, logabs = sl
    if sign == 0 or logabs < -745.0:
        return 0.0
    return sign * math.exp(logabs)


def _miller(orders: tuple[int, ...], x: float) -> dict[int, tuple[int, float]]:
    """Backward recurrence with the start margin doubled until two runs agree."""
    top = max(orders)
    base = max(top, math.ceil(x))
    margin = _miller_start(top, x) - base
    prev = _miller_run(orders, x, base + margin)
    for _ in range(_MILLER_MAX_DOUBLINGS):
        margin *= 2
        cur = _miller_run(orders, x, base + margin)
        va = [_to_float(prev[o]) for o in orders]
        vb = [_to_float(cur[o]) for o in orders]
        # local amplitude keeps the comparison meaningful next to a zero
        scale = math.hypot(*vb) if len(vb) > 1 else abs(vb[0])
        # rounding noise of an N-step sweep grows roughly like N * eps
        tol = max(_MILLER_TOL, 2e-17 * (base + margin))
        if all(abs(a - b) <= tol * max(abs(a), abs(b), scale) for a, b in zip(va, vb)):
            return cur
        prev = cur
    raise ArithmeticError(f"Miller recurrence did not settle for orders {orders} at x={x}")


# --------------------------------------------------------------------------
# public evaluators
# --------------------------------------------------------------------------

def _jn_values(orders: tuple[int, ...], x: float) -> dict[int, float]:
    if x == 0.0:
        return {o: (1.0 if o == 0 else 0.0) for o in orders}
    out = {}
    miller_orders = []
    for o in orders:
        if _use_series(o, x):
            out[o] = _series_value(o, x)
        else:
            miller_orders.append(o)
    if miller_orders:
        # include the next order so the agreement test sees the local amplitude
        extra = tuple(sorted(set(miller_orders) | {max(miller_orders) + 1}))
        res = _miller(extra, x)
        for o in miller_orders:
            out[o] = _to_float(res[o])
    return out


def bessel_j(order: int, x: float) -> float:
    """Bessel function of the first kind J_order(x) for integer order >= 0.

    Raises
    ------
    TypeError
        If ``order`` is not an integer.
    ValueError
        If ``x`` is negative or not finite, or the order exceeds 10**6.
    """
    nu = _check_order(order)
    x = _check_arg(x)
    return _jn_values((nu,), x)[nu]


def bessel_j_prime(order: int, x: float) -> float:
    """Derivative J_order'(x) = (J_{order-1}(x) - J_{order+1}(x)) / 2."""
    nu = _check_order(order)
    x = _check_arg(x)
    if nu == 0:
        return -_jn_values((1,), x)[1]
    vals = _jn_values((nu - 1, nu + 1), x)
    return 0.5 * (vals[nu - 1] - vals[nu + 1])


def _bessel_pair(nu: int, x: float) -> tuple[float, float]:
    """(J_nu(x), J_nu'(x)) from a single evaluation pass."""
    if nu == 0:
        vals = _jn_values((0, 1), x)
        return vals[0], -vals[1]
    vals = _jn_values((nu - 1, nu, nu + 1), x)
    return vals[nu], 0.5 * (vals[nu - 1] - vals[nu + 1])


def log_bessel_j_reduced(order: int, x: float) -> tuple[int, float]:
    """Sign and log-magnitude of J_order(x) / (x/2)**order.

    The reduced function is entire in ``x`` and equals 1/order! at 0, so it
    stays finite where the prefactor ``(x/2)**order`` under- or overflows.
    """
    nu = _check_order(order)
    x = _check_arg(x)
    if x == 0.0 or _use_series(nu, x):
        if x == 0.0:
            return 1, -math.lgamma(nu + 1)
        s, bits = _series_sum_fixed(nu, x)
        sign, logabs = _series_log(nu, x, s, bits)
        return sign, logabs - nu * math.log(0.5 * x)
    res = _miller((nu, nu + 1), x)
    sign, logabs = res[nu]
    return sign, logabs - nu * math.log(0.5 * x)


# --------------------------------------------------------------------------
# zeros
# --------------------------------------------------------------------------

def _refine(nu: int, lo: float, hi: float, flo: float) -> tuple[float, tuple[float, float]]:
    """Bisection to width 1e-6, then at most 8 bracket-guarded Newton steps."""
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        fmid = bessel_j(nu, mid)
        if fmid == 0.0:
            return mid, (lo, hi)
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    bracket = (lo, hi)
    x = 0.5 * (lo + hi)
    for _ in range(8):
        f, df = _bessel_pair(nu, x)
        if f == 0.0 or df == 0.0:
            break
        step = f / df
        x_new = x - step
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if (f > 0) == (flo > 0):
            lo = max(lo, x)
        else:
            hi = min(hi, x)
        if abs(x_new - x) <= 4e-16 * x:
            x = x_new
            break
        x = x_new
    return x, bracket


@lru_cache(maxsize=4096)
def first_zero(m: int) -> BesselZero:
    """First positive zero alpha_{m,1} of J_m with a certified bracket.

    The search starts at ``m + 1.8557571 m^(1/3)`` and steps outward until
    ``J_m`` changes sign; for ``m = 0`` the bracket (2, 3) is used directly.
    """
    m = _check_order(m)
    if m == 0:
        lo, hi = 2.0, 3.0
    else:
        cbrt = m ** (1.0 / 3.0)
        lower = float(max(m, 1))
        upper = m + 20.0 * (cbrt + 1.0)
        step = 0.5 * cbrt
        guess = m + ZERO_ASYMPTOTIC_C * cbrt
        fg = bessel_j(m, guess)
        if fg > 0:
            lo = guess
            hi = lo + step
            while bessel_j(m, hi) > 0:
                lo = hi
                hi = lo + step
                if hi > upper:
                    raise ArithmeticError(f"no sign change of J_{m} in [{lower}, {upper}]")
        else:
            hi = guess
            lo = max(hi - step, lower)
            while bessel_j(m, lo) <= 0:
                if lo <= lower:
                    raise ArithmeticError(f"no sign change of J_{m} in [{lower}, {upper}]")
                hi = lo
                lo = max(hi - step, lower)
    flo = bessel_j(m, lo)
    if not (flo > 0 and bessel_j(m, hi) <= 0):
        raise ArithmeticError(f"bracket ({lo}, {hi}) does not isolate a zero of J_{m}")
    value, bracket = _refine(m, lo, hi, flo)
    return BesselZero(order=m, index=1, value=value, bracket=bracket)


def zeros(m: int, rmax: int) -> list[BesselZero]:
    """The first ``rmax`` positive zeros of J_m, found by marching upward."""
    m = _check_order(m)
    if isinstance(rmax, bool) or not isinstance(rmax, numbers.Integral) or rmax < 1:
        raise ValueError(f"zero index must be a positive integer, got {rmax!r}")
    if rmax > 10**4:
        raise ValueError(f"zero index {rmax} exceeds 10**4")
    out = [first_zero(m)]
    # consecutive zeros are more than pi/2 apart, so a pi/2 march cannot skip two
    step = 0.5 * math.pi
    while len(out) < rmax:
        prev = out[-1].value
        lo = prev + 0.25
        flo = bessel_j(m, lo)
        hi = lo + step
        fhi = bessel_j(m, hi)
        while (fhi > 0) == (flo > 0) and fhi != 0.0:
            lo, flo = hi, fhi
            hi = lo + step
            fhi = bessel_j(m, hi)
        value, bracket = _refine(m, lo, hi, flo)
        out.append(BesselZero(order=m, index=len(out) + 1, value=value, bracket=bracket))
    return out


@lru_cache(maxsize=4096)
def zero(m: int, r: int) -> BesselZero:
    """r-th positive zero alpha_{m,r} of J_m."""
    if r == 1:
        return first_zero(_check_order(m))
    return zeros(m, r)[-1]


# --------------------------------------------------------------------------
# factorials
# --------------------------------------------------------------------------

def log_factorial(n: int) -> float:
    """log(n!) for 0 <= n <= 10**7."""
    if isinstance(n, bool) or not isinstance(n, numbers.Integral) or n < 0:
        raise ValueError(f"log_factorial needs a non-negative integer, got {n!r}")
    if n > 10**7:
        raise ValueError(f"log_factorial argument {n} exceeds 10**7")
    if n < 2:
        return 0.0
    return math.lgamma(n + 1)


def exact_binomial(a: int, b: int) -> int:
    """Binomial coefficient C(a, b) as an exact integer (0 outside 0 <= b <= a)."""
    if a < 0 or b < 0 or b > a:
        return 0
    return math.comb(a, b)
