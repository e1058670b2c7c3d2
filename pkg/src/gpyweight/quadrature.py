"""Composite Gauss-Legendre rules on (0, 1] with panels refined toward 0."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuadratureGrid:
    nodes: np.ndarray
    weights: np.ndarray
    scheme: str
    panels: int


def composite_gauss_legendre(breaks, order: int) -> QuadratureGrid:
    """Gauss-Legendre rule with ``order`` nodes on each interval of ``breaks``.

    ``order`` may also be a sequence giving the node count per panel.
    """
    breaks = np.asarray(breaks, dtype=float)
    if breaks.ndim != 1 or breaks.size < 2 or np.any(np.diff(breaks) <= 0):
        raise ValueError("breakpoints must be strictly increasing")
    counts = np.broadcast_to(np.asarray(order, dtype=int), (breaks.size - 1,))
    nodes, weights = [], []
    cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for a, b, q in zip(breaks[:-1], breaks[1:], counts):
        if q not in cache:
            cache[q] = np.polynomial.legendre.leggauss(int(q))
        t, w = cache[q]
        half = 0.5 * (b - a)
        nodes.append(a + half * (t + 1.0))
        weights.append(half * w)
    return QuadratureGrid(
        nodes=np.concatenate(nodes),
        weights=np.concatenate(weights),
        scheme="gauss_legendre_composite",
        panels=breaks.size - 1,
    )


def geometric_breaks(levels: int, ratio: float = 0.5, top_splits: int = 1) -> np.ndarray:
    """Breakpoints 0, ratio**(levels-1), ..., ratio, 1.

    ``top_splits`` further divides the outermost panel [ratio, 1] uniformly.
    """
    if levels < 1:
        raise ValueError("need at least one panel")
    inner = ratio ** np.arange(levels - 1, 0, -1, dtype=float)
    top = np.linspace(ratio if levels > 1 else 0.0, 1.0, top_splits + 1)
    return np.concatenate(([0.0], inner, top[1:])) if levels > 1 else top


def dyadic_grid(points: int = 1024, order: int = 32, top_splits: int = 4) -> QuadratureGrid:
    """32-point Gauss-Legendre panels halving toward 0, with at least ``points`` nodes."""
    panels = max(-(-points // order), top_splits + 1)
    levels = panels - top_splits + 1
    return composite_gauss_legendre(geometric_breaks(levels, 0.5, top_splits), order)
