"""Gauss-Legendre rules on [0, 1] and their tensor products on rectangles."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_POINTS = 30


@dataclass(frozen=True, eq=False)
class QuadRule1D:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True, eq=False)
class QuadRule2D:
    points: np.ndarray  # (n*n, 2)
    weights: np.ndarray  # (n*n,)

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 1]


def _legendre_and_derivative(n: int, x: np.ndarray):
    """Values of P_n and P_n' by the three-term recurrence."""
    p0 = np.ones_like(x)
    p1 = x.copy()
    for m in range(2, n + 1):
        p0, p1 = p1, ((2 * m - 1) * x * p1 - (m - 1) * p0) / m
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


@lru_cache(maxsize=None)
def _gauss1d_cached(n: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
    if n == 1:
        return (0.5,), (1.0,)
    i = np.arange(1, n + 1)
    # Chebyshev-type estimates, descending in (-1, 1)
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(100):
        p, dp = _legendre_and_derivative(n, x)
        step = p / dp
        x = x - step
        if np.max(np.abs(step)) < 1e-15:
            break
    else:
        raise RuntimeError(f"Legendre root refinement did not converge for n={n}")
    _, dp = _legendre_and_derivative(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    # ascending order, mapped to (0, 1)
    x = x[::-1]
    w = w[::-1]
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 * w
    # enforce exact symmetry about 1/2
    nodes = 0.5 * (nodes + (1.0 - nodes[::-1]))
    weights = 0.5 * (weights + weights[::-1])
    return tuple(nodes), tuple(weights)


def gauss1d(n: int) -> QuadRule1D:
    """``n``-point Gauss-Legendre rule on [0, 1], exact to degree ``2n - 1``."""
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_POINTS:
        raise ValueError(f"point count must be an integer in [1, {MAX_POINTS}], got {n!r}")
    nodes, weights = _gauss1d_cached(int(n))
    return QuadRule1D(np.array(nodes), np.array(weights))


def tensor_rule(rule: QuadRule1D, rect=(0.0, 0.0, 1.0, 1.0)) -> QuadRule2D:
    """Tensor product of ``rule`` with itself on ``[x0, x0+hx] x [y0, y0+hy]``.

    Points are ordered with x varying slowest.
    """
    x0, y0, hx, hy = rect
    if hx <= 0 or hy <= 0:
        raise ValueError("rectangle sides must be positive")
    X, Y = np.meshgrid(x0 + hx * rule.nodes, y0 + hy * rule.nodes, indexing="ij")
    W = np.outer(rule.weights, rule.weights) * (hx * hy)
    return QuadRule2D(np.column_stack([X.ravel(), Y.ravel()]), W.ravel())


def integrate(f, rule: QuadRule2D) -> float:
    """``sum(w_i * f(x_i, y_i))``; ``f`` is called once with coordinate arrays."""
    vals = np.asarray(f(rule.x, rule.y), dtype=float)
    vals = np.broadcast_to(vals, rule.weights.shape)
    bad = ~np.isfinite(vals)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise FloatingPointError(
            f"integrand is not finite at ({rule.x[i]!r}, {rule.y[i]!r})"
        )
    return float(vals @ rule.weights)
