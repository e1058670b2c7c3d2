"""Certified ceilings for S(k): the iterated product bound, its log2 refinement,
the trivial 4/k and the sup-norm of T acting on C[0, 1]."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .specfun import KParams

__all__ = [
    "BoundReport",
    "CnormBound",
    "product_bound",
    "refined_bound",
    "trivial_bound",
    "cnorm_bound",
    "bound_report",
]

DEFAULT_TERMS = 40


def product_bound(k: int, J: int = DEFAULT_TERMS) -> float:
    """4 / prod_{j=1}^{J} (k + 2**j - 2)**(2**-j), with the tail closed off.

    The exponents 2**-j sum to 1 - 2**-J; the missing mass 2**-J is charged
    to the last retained factor, so the truncated value is exactly the bound
    obtained by stopping the iteration after J steps.
    """
    KParams(k)
    if J < 20:
        raise ValueError("need at least 20 product terms")
    logs = [math.ldexp(math.log(k + 2.0**j - 2.0), -j) for j in range(1, J + 1)]
    logs.append(math.ldexp(math.log(k + 2.0**J - 2.0), -J))
    return 4.0 * math.exp(-math.fsum(logs))


def refined_bound(k: int) -> float:
    """4 / (k + log2 k - 5), valid for k >= 4."""
    KParams(k)
    if k < 4:
        raise ValueError("refined bound needs k >= 4")
    return 4.0 / (k + math.log2(k) - 5.0)


def trivial_bound(k: int) -> float:
    KParams(k)
    return 4.0 / k


@dataclass(frozen=True)
class CnormBound:
    value: float
    x_star: float
    sampled_max: float
    sampled_argmax: float


def _T_one(n: int, x):
    return 4.0 * n / (n * n - 4.0) * x - 2.0 / (n - 2.0) * np.power(x, 0.5 * n)


def cnorm_bound(k: int, samples: int = 10_001) -> CnormBound:
    """max_x (T1)(x) = (4/(n+2))**(n/(n-2)), attained at x* = (4/(n+2))**(2/(n-2)).

    The maximiser is confirmed against a grid search of (T1) on [0, 1].
    """
    kp = KParams(k)
    if k < 5:
        raise ValueError("operator-norm bound needs k >= 5")
    n = kp.n
    base = 4.0 / (n + 2.0)
    value = base ** (n / (n - 2.0))
    x_star = base ** (2.0 / (n - 2.0))
    grid = np.linspace(0.0, 1.0, samples)
    t1 = _T_one(n, grid)
    i = int(np.argmax(t1))
    return CnormBound(value=value, x_star=x_star, sampled_max=float(t1[i]), sampled_argmax=float(grid[i]))


@dataclass(frozen=True)
class BoundReport:
    k: int
    product_bound: float
    refined_bound: Optional[float]
    trivial_bound: float
    cnorm_bound: Optional[float]
    truncation_terms: int
    notes: tuple[str, ...] = ()


def bound_report(k: int, J: int = DEFAULT_TERMS) -> BoundReport:
    """All ceilings for one k; gated bounds are None with an explanatory note."""
    KParams(k)
    notes = []
    refined = refined_bound(k) if k >= 4 else None
    if refined is None:
        notes.append("refined_bound omitted: requires k >= 4")
    cnorm = cnorm_bound(k).value if k >= 5 else None
    if cnorm is None:
        notes.append("cnorm_bound omitted: requires k >= 5 (n = k-1 >= 4)")
    return BoundReport(
        k=k,
        product_bound=product_bound(k, J),
        refined_bound=refined,
        trivial_bound=trivial_bound(k),
        cnorm_bound=cnorm,
        truncation_terms=J,
        notes=tuple(notes),
    )
