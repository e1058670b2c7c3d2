"""Closed-form extremal solution: S(k), the eigenfunctions q_r and the optimal P.

With m = k-2, n = k-1 and alpha = alpha_{m,r} the r-th zero of J_m,

    q_r(x) = x**(-m/2) J_m(alpha sqrt(x)),   lambda_{m,r} = 4n / alpha**2,

and q_r solves q'' + (n/x) q' + (b/x) q = 0 with b = alpha**2 / 4.

Writing f_nu(x) = x**(-nu/2) J_nu(alpha sqrt(x)) the standard recurrence
(z**-nu J_nu)' = -z**-nu J_{nu+1} gives f_nu' = -(alpha/2) f_{nu+1}, so every
derivative of q is again a function of the same family.  Each f_nu is
evaluated as (alpha/2)**nu times the entire function J_nu(z)/(z/2)**nu, which
removes the 0 * inf indeterminacy at x = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import rayleigh
from .specfun import BesselZero, KParams, bessel_j, first_zero, log_bessel_j_reduced, zero

__all__ = ["Eigenpair", "S_of_k", "eigenpair", "ode_residual", "optimal_P"]


def _f_nu(nu: int, alpha: float, x, log_shift: float = 0.0):
    """x**(-nu/2) J_nu(alpha sqrt x) * exp(-log_shift), elementwise."""
    xs = np.asarray(x, dtype=float)
    if np.any(xs < 0):
        raise ValueError("x must be non-negative")
    out = np.empty(xs.shape)
    base = nu * math.log(0.5 * alpha) - log_shift
    for idx, xi in np.ndenumerate(xs):
        sign, logabs = log_bessel_j_reduced(nu, alpha * math.sqrt(xi))
        out[idx] = sign * math.exp(base + logabs) if sign else 0.0
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class Eigenpair:
    """lambda_{m,r} with its Bessel zero and the eigenfunction q_r.

    ``q`` is the unnormalised x**(-m/2) J_m(alpha sqrt x); ``q_unit`` divides
    by q(0) = (alpha/2)**m / m! so values stay O(1) for large m.
    """

    k: KParams
    r: int
    lam: float
    alpha: BesselZero
    b: float

    def _shift(self, unit: bool) -> float:
        m = self.k.m
        return m * math.log(0.5 * self.alpha.value) - math.lgamma(m + 1) if unit else 0.0

    def q(self, x, alpha: Optional[float] = None, unit: bool = False):
        a = self.alpha.value if alpha is None else alpha
        return _f_nu(self.k.m, a, x, self._shift(unit))

    def dq(self, x, alpha: Optional[float] = None, unit: bool = False):
        a = self.alpha.value if alpha is None else alpha
        return -0.5 * a * _f_nu(self.k.m + 1, a, x, self._shift(unit))

    def d2q(self, x, alpha: Optional[float] = None, unit: bool = False):
        a = self.alpha.value if alpha is None else alpha
        return 0.25 * a * a * _f_nu(self.k.m + 2, a, x, self._shift(unit))

    def q_unit(self, x):
        return self.q(x, unit=True)

    def dq_unit(self, x):
        return self.dq(x, unit=True)

    def phi(self, x):
        """x**(n/2) q'(x) = -(alpha/2) J_n(alpha sqrt x), the eigenfunction of T."""
        xs = np.asarray(x, dtype=float)
        a = self.alpha.value
        out = np.array([-0.5 * a * bessel_j(self.k.n, a * math.sqrt(v)) for v in xs.ravel()])
        out = out.reshape(xs.shape)
        return out[()] if out.ndim == 0 else out


def S_of_k(k: int) -> float:
    """S(k) = 4(k-1) / alpha_{k-2,1}**2."""
    kp = KParams(k)
    if k > 1_000_000:
        raise ValueError("k must not exceed 10**6")
    a = first_zero(kp.m).value
    return 4.0 * kp.n / (a * a)


def eigenpair(k: int, r: int = 1) -> Eigenpair:
    kp = KParams(k)
    z = zero(kp.m, r)
    a = z.value
    return Eigenpair(k=kp, r=r, lam=4.0 * kp.n / (a * a), alpha=z, b=0.25 * a * a)


def ode_residual(e: Eigenpair, x: float, alpha: Optional[float] = None, samples: int = 200) -> float:
    """Scaled residual of q'' + (n/x) q' + (b/x) q at ``x``.

    ``b`` is always the eigenpair's own alpha**2/4; passing a different
    ``alpha`` evaluates the same operator on a mistuned Bessel function, which
    is what a negative control needs (with matched b every alpha solves it).
    The result is divided by max |q''| sampled on [x, 1].
    """
    if not 1e-6 <= x <= 1.0:
        raise ValueError("x must lie in [1e-6, 1]")
    n = e.k.n
    res = e.d2q(x, alpha, unit=True) + (n / x) * e.dq(x, alpha, unit=True) + (e.b / x) * e.q(x, alpha, unit=True)
    grid = np.linspace(x, 1.0, samples)
    scale = float(np.max(np.abs(e.d2q(grid, alpha, unit=True))))
    return float(res) / scale if scale > 0 else float(res)


def optimal_P(k: int, x_grid) -> np.ndarray:
    """Optimal weight P(x) from the Liouville integral of q_1, scaled to P(1) = 1."""
    e = eigenpair(k, 1)
    xs = np.asarray(x_grid, dtype=float)
    if np.any((xs < 0) | (xs > 1)):
        raise ValueError("grid must lie in [0, 1]")

    def q(t):
        return float(e.q_unit(t))

    norm = rayleigh.liouville_P_from_q(q, e.k, 1.0)
    vals = np.array([rayleigh.liouville_P_from_q(q, e.k, float(v)) for v in xs.ravel()])
    return (vals / norm).reshape(xs.shape)
