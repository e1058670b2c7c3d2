"""Nystrom discretisation of the integral operator

    (T phi)(x) = int_0^1 phi(y) K(x, y) dy,   K(x, y) = (min(x,y) / max(x,y))**(n/2),

whose largest eigenvalue is S(k).  This route never touches a Bessel function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .quadrature import QuadratureGrid, composite_gauss_legendre, geometric_breaks
from .specfun import KParams

__all__ = [
    "SpectralResult",
    "Extrapolation",
    "ConvergenceError",
    "kernel",
    "nystrom_grid",
    "nystrom_matrix",
    "nystrom_lambda1",
    "nystrom_extrapolated",
    "richardson",
    "leading_eigenvalues",
    "apply_T",
    "T_one_closed_form",
    "verify_T_derivative",
]


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, iterations: int):
        super().__init__(f"{message} after {iterations} iterations")
        self.iterations = iterations


@dataclass(frozen=True)
class SpectralResult:
    lambda1: float
    eigvec: np.ndarray
    grid: QuadratureGrid
    iterations: int
    residual: float


@dataclass(frozen=True)
class Extrapolation:
    value: float
    order: float
    values: tuple[float, ...]
    sizes: tuple[int, ...]


def _kp(k) -> KParams:
    return k if isinstance(k, KParams) else KParams(k)


def kernel(k, x, y):
    """(min/max)**(n/2), with the value 0 whenever x or y is 0."""
    n = _kp(k).n
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lo = np.minimum(x, y)
    hi = np.maximum(x, y)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(hi > 0, (lo / np.where(hi > 0, hi, 1.0)) ** (0.5 * n), 0.0)
    return out[()] if out.ndim == 0 else out


def nystrom_grid(N: int, panels: int = 8, ratio: float = 0.5) -> QuadratureGrid:
    """N Gauss-Legendre nodes spread evenly over geometrically shrinking panels."""
    counts = [N // panels + (1 if i < N % panels else 0) for i in range(panels)]
    return composite_gauss_legendre(geometric_breaks(panels, ratio), counts)


def nystrom_matrix(k, grid: QuadratureGrid, corrected: bool = True) -> np.ndarray:
    """Symmetric matrix sqrt(w_i) K(x_i, x_j) sqrt(w_j).

    With ``corrected`` the diagonal also carries (T1)(x_i) - sum_j w_j K(x_i, x_j),
    the quadrature error of the kernel row against its exact integral.  This is
    singularity subtraction, i.e. the rule applied to K(x_i, y)(phi(y) - phi(x_i)),
    which softens the kink on the diagonal.  The correction is diagonal, so it
    commutes with the sqrt(w) similarity and the matrix stays symmetric.
    """
    kp = _kp(k)
    x, w = grid.nodes, grid.weights
    sw = np.sqrt(w)
    K = kernel(kp, x[:, None], x[None, :])
    B = (sw[:, None] * sw[None, :]) * K
    if corrected:
        B[np.diag_indices_from(B)] += T_one_closed_form(kp, x) - K @ w
    return B


def nystrom_lambda1(
    k,
    N: int,
    tol: float = 1e-13,
    residual_tol: float = 1e-10,
    maxiter: int = 100_000,
    corrected: bool = True,
) -> SpectralResult:
    """Largest eigenvalue of the symmetrised Nystrom matrix by power iteration.

    Iteration stops once successive Rayleigh quotients differ by at most
    ``tol`` and the eigen-residual is below ``residual_tol``.
    """
    kp = _kp(k)
    if not 50 <= N <= 10_000:
        raise ValueError(f"node count must lie in [50, 10000], got {N}")
    grid = nystrom_grid(N)
    w = grid.weights
    sw = np.sqrt(w)
    B = nystrom_matrix(kp, grid, corrected)

    v = sw / np.linalg.norm(sw)
    lam = float(v @ B @ v)
    residual = math.inf
    for it in range(1, maxiter + 1):
        Bv = B @ v
        lam_new = float(v @ Bv)
        residual = float(np.linalg.norm(Bv - lam_new * v))
        v = Bv / np.linalg.norm(Bv)
        if abs(lam_new - lam) <= tol and residual <= residual_tol:
            lam = lam_new
            break
        lam = lam_new
    else:
        raise ConvergenceError("power iteration did not converge", maxiter)
    phi = v / sw
    phi = phi / math.sqrt(float(np.sum(w * phi**2)))
    if phi.sum() < 0:
        phi = -phi
    return SpectralResult(lambda1=lam, eigvec=phi, grid=grid, iterations=it, residual=residual)


def richardson(values: Sequence[float], sizes: Sequence[int]) -> Extrapolation:
    """Extrapolate a sequence computed at doubling sizes, fitting the order.

    With d1 = v2 - v1 and d2 = v3 - v2 the observed order is
    p = log2(d1 / d2) and the limit estimate v3 + d2 / (2**p - 1).
    Falls back to the finest value when the differences are not geometric.
    """
    if len(values) != 3 or len(sizes) != 3:
        raise ValueError("need exactly three resolutions")
    v1, v2, v3 = values
    d1, d2 = v2 - v1, v3 - v2
    if d2 == 0.0 or d1 == 0.0 or (d1 > 0) != (d2 > 0) or abs(d2) >= abs(d1):
        return Extrapolation(v3, math.nan, tuple(values), tuple(sizes))
    ratio = sizes[1] / sizes[0]
    p = math.log(d1 / d2) / math.log(ratio)
    return Extrapolation(v3 + d2 / (ratio**p - 1.0), p, tuple(values), tuple(sizes))


def nystrom_extrapolated(
    k, sizes: Sequence[int] = (200, 400, 800), corrected: bool = True
) -> Extrapolation:
    values = [nystrom_lambda1(k, N, corrected=corrected).lambda1 for N in sizes]
    return richardson(values, sizes)


def leading_eigenvalues(k, N: int, count: int = 5) -> np.ndarray:
    """The ``count`` largest eigenvalues of the Nystrom matrix (dense solver)."""
    if not 1 <= count <= 5:
        raise ValueError("only the five leading eigenvalues are reported")
    B = nystrom_matrix(k, nystrom_grid(N))
    return np.linalg.eigvalsh(B)[::-1][:count]


def apply_T(k, phi: Callable[[float], float], x: float) -> float:
    """(T phi)(x), integrating separately on either side of the kink at y = x."""
    n = _kp(k).n
    if x <= 0.0:
        return 0.0
    half = 0.5 * n
    left, _ = integrate.quad(lambda y: phi(y) * (y / x) ** half, 0.0, x,
                             epsabs=1e-14, epsrel=1e-13, limit=200)
    right, _ = integrate.quad(lambda y: phi(y) * (x / y) ** half, x, 1.0,
                              epsabs=1e-14, epsrel=1e-13, limit=200)
    return left + right


def T_one_closed_form(k, x):
    """(T 1)(x) = 4n/(n^2-4) x - 2/(n-2) x^(n/2); x/2 - x log x when n = 2."""
    n = _kp(k).n
    x = np.asarray(x, dtype=float)
    if n == 2:
        return 0.5 * x - x * np.log(np.where(x > 0, x, 1.0))
    return 4.0 * n / (n * n - 4.0) * x - 2.0 / (n - 2.0) * x ** (0.5 * n)


def verify_T_derivative(k, phi: Callable[[float], float], x: float, h: float = 1e-5):
    """Finite-difference derivative of T phi next to the integral formula.

    Returns ``(lhs, rhs)`` where ``lhs`` is the central difference of
    ``apply_T`` and ``rhs = -(n/2x) (T phi)(x) + n x^(n/2-1) int_x^1 phi(y) y^(-n/2) dy``.
    """
    n = _kp(k).n
    if not 1e-2 <= x < 1.0:
        raise ValueError("x must lie in [0.01, 1)")
    lhs = (apply_T(k, phi, x + h) - apply_T(k, phi, x - h)) / (2.0 * h)
    tail, _ = integrate.quad(lambda y: phi(y) * y ** (-0.5 * n), x, 1.0,
                             epsabs=1e-14, epsrel=1e-13, limit=200)
    rhs = -(n / (2.0 * x)) * apply_T(k, phi, x) + n * x ** (0.5 * n - 1.0) * tail
    return lhs, rhs
