"""The quasi-optimal weight family

    P_k(x) = sum_{l odd, M <= l <= 2M} g(l/M) (k/2)**l x**(k+l) / (k+l)!,
    M = ceil(C1 k**(1/3) / 6),   g(y) = (y-1)**4 (2-y)**4,

its exact certification A_k (k + C1 k**(1/3)) - 4 B_k >= 0, and the finite
sums I_k(H), I_k'(H), I_k''(H), I*_k(H) behind the lower-bound argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .rayleigh import RatioBreakdown, WeightPoly, ratio_of_poly

__all__ = [
    "QuasiPolySpec",
    "Certificate",
    "HDiagnostics",
    "cutoff_g",
    "block_size",
    "build",
    "certify",
    "scan_C1",
    "smallest_certifying",
    "diagnostics",
    "i_star",
]


def cutoff_g(y):
    """g(y) = (y-1)**4 (2-y)**4; exact for Fraction input."""
    return (y - 1) ** 4 * (2 - y) ** 4


def _as_fraction(c) -> Fraction:
    if isinstance(c, bool):
        raise TypeError("C1 must be a real number")
    return Fraction(c)


def block_size(k: int, C1) -> int:
    """M = ceil(C1 k**(1/3) / 6), decided exactly: the least M with (6M)**3 >= C1**3 k."""
    c = _as_fraction(C1)
    if c <= 0:
        raise ValueError("C1 must be positive")
    target = c**3 * k
    M = max(1, math.ceil(float(c) * k ** (1.0 / 3.0) / 6.0))
    while M > 1 and (6 * (M - 1)) ** 3 >= target:
        M -= 1
    while (6 * M) ** 3 < target:
        M += 1
    return M


@dataclass(frozen=True)
class QuasiPolySpec:
    k: int
    C1: Fraction
    M: int
    poly: WeightPoly

    @property
    def degree(self) -> int:
        return self.poly.degree


def build(k: int, C1) -> QuasiPolySpec:
    if isinstance(k, bool) or not isinstance(k, int):
        raise TypeError("k must be an integer")
    if k < 8:
        raise ValueError("quasi-polynomial needs k >= 8")
    c = _as_fraction(C1)
    if not 1 <= c <= 200:
        raise ValueError("C1 must lie in [1, 200]")
    M = block_size(k, c)
    if M < 2:
        raise ValueError(f"block size M = {M} < 2 makes the cutoff degenerate")
    half_k = Fraction(k, 2)
    terms = {}
    for ell in range(M, 2 * M + 1):
        if ell % 2 == 1:
            w = cutoff_g(Fraction(ell, M))
            if w:
                terms[ell] = w * half_k**ell
    return QuasiPolySpec(k=k, C1=c, M=M, poly=WeightPoly(k, terms))


@dataclass(frozen=True)
class Certificate:
    k: int
    C1: Fraction
    M: int
    degree: int
    ratio: Fraction
    target: float
    margin: float
    certified: bool
    breakdown: RatioBreakdown


def _verdict(A: Fraction, B: Fraction, k: int, C1: Fraction) -> bool:
    """Sign test of A (k + C1 k**(1/3)) - 4B >= 0 without rounding k**(1/3)."""
    T = 4 * B - A * k
    if T <= 0:
        return True
    return (A * C1) ** 3 * k >= T**3


def certify(spec: QuasiPolySpec) -> Certificate:
    br = ratio_of_poly(spec.poly, path="exact")
    target = 4.0 / (spec.k + float(spec.C1) * spec.k ** (1.0 / 3.0))
    return Certificate(
        k=spec.k,
        C1=spec.C1,
        M=spec.M,
        degree=spec.degree,
        ratio=br.ratio_exact,
        target=target,
        margin=br.ratio - target,
        certified=_verdict(br.A_exact, br.B_exact, spec.k, spec.C1),
        breakdown=br,
    )


def scan_C1(k: int, values: Iterable) -> list[Certificate]:
    """Certificates for every C1 in ``values`` that yields a valid construction.

    The polynomial depends on C1 only through M, so each distinct M is
    evaluated once.
    """
    out = []
    by_M: dict[int, RatioBreakdown] = {}
    for c in values:
        try:
            spec = build(k, c)
        except ValueError:
            continue
        br = by_M.get(spec.M)
        if br is None:
            br = by_M[spec.M] = ratio_of_poly(spec.poly, path="exact")
        target = 4.0 / (k + float(spec.C1) * k ** (1.0 / 3.0))
        out.append(Certificate(
            k=k, C1=spec.C1, M=spec.M, degree=spec.degree, ratio=br.ratio_exact,
            target=target, margin=br.ratio - target,
            certified=_verdict(br.A_exact, br.B_exact, k, spec.C1), breakdown=br,
        ))
    return out


def smallest_certifying(certs: Iterable[Certificate]) -> Optional[Certificate]:
    good = [c for c in certs if c.certified]
    return min(good, key=lambda c: c.C1) if good else None


@dataclass(frozen=True)
class HDiagnostics:
    """Finite sums at one H.  ``IkStar`` sums over |m| <= ceil(10 sqrt H) + H,
    beyond which every term is below exp(-100).

    ``IkH`` uses the uniform factor 1/(k+4M) and drops the weights
    k**(2H-2) k!/(k+2H-2)!, so summing it over H only indicates the sign of
    A_k (k + C1 k**(1/3)) - 4 B_k.  ``IkWeighted`` keeps both exactly:
    4 * sum_H IkWeighted(H) = k! (A_k (k + C1 k**(1/3)) - 4 B_k).
    """

    H: int
    IkH: float
    IkWeighted: float
    IkPrime: float
    IkDoublePrime: float
    IkStar: float
    tM: float
    binomial_mass: float


def i_star(H: int) -> float:
    """sum over m = H (mod 2) of (2 m**2 / H - 1) exp(-m**2 / H)."""
    if H < 1:
        raise ValueError("H must be positive")
    cut = math.ceil(10 * math.sqrt(H)) + H
    start = -cut if (cut - H) % 2 == 0 else -cut + 1
    terms = [(2.0 * m * m / H - 1.0) * math.exp(-m * m / H) for m in range(start, cut + 1, 2)]
    return math.fsum(terms)


def diagnostics(spec: QuasiPolySpec, H: int) -> HDiagnostics:
    M, k = spec.M, spec.k
    if not M < H <= 2 * M:
        raise ValueError(f"H must lie in ({M}, {2 * M}]")
    lead = (k + float(spec.C1) * k ** (1.0 / 3.0)) / (k + 4 * M)
    scale = Fraction(1, 1 << (2 * H))
    exact_lead = (k + float(spec.C1) * k ** (1.0 / 3.0)) / (k + 2 * H - 1)
    weight = math.exp((2 * H - 2) * math.log(k) + math.lgamma(k + 1) - math.lgamma(k + 2 * H - 1))
    ik, ikw, ik1, ik2, mass = [], [], [], [], []
    for u in range(M + 1, 2 * M + 1):
        v = 2 * H - u
        if u % 2 or v % 2 or not M < v <= 2 * M:
            continue
        D = (u - v) // 2
        w = float(math.comb(u + v - 2, u - 1) * scale)
        gg = float(cutoff_g(Fraction(u - 1, M)) * cutoff_g(Fraction(v - 1, M)))
        shape = (4.0 * D * D - 2.0 * H) / (H * H - D * D)
        growth = (u + v) * (u + v - 1) / (u * v)
        ik.append(w * gg * (lead * growth - 4.0))
        ikw.append(weight * w * gg * (exact_lead * growth - 4.0))
        ik1.append(w * gg * shape)
        ik2.append(w * shape)
        mass.append(w)
    return HDiagnostics(
        H=H,
        IkH=math.fsum(ik),
        IkWeighted=math.fsum(ikw),
        IkPrime=math.fsum(ik1),
        IkDoublePrime=math.fsum(ik2),
        IkStar=i_star(H),
        tM=4.0 * math.sqrt(M * math.log(M)),
        binomial_mass=math.fsum(mass),
    )
