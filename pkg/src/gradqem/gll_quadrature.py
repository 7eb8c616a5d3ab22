"""Gauss-Lobatto-Legendre nodes and weights."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels as _k


@dataclass(frozen=True)
class NodeGrid:
    """GLL grid of order N on [-1, 1]: ascending nodes ``xi`` and weights ``h``."""

    xi: np.ndarray
    h: np.ndarray

    @property
    def n(self) -> int:
        return self.xi.shape[0]

    def integrate(self, values) -> float:
        return float(np.dot(self.h, values))


@lru_cache(maxsize=64)
def _grid(n: int):
    x, pn, _ = _k.gll_newton(n, 1e-15, 100)
    x = np.array(x, dtype=float)
    # enforce exact end points and symmetry
    x[0], x[-1] = -1.0, 1.0
    x = 0.5 * (x - x[::-1])
    if n % 2 == 1:
        x[n // 2] = 0.0
    w = 2.0 / (n * (n - 1) * np.asarray(pn) ** 2)
    w = 0.5 * (w + w[::-1])
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gll_grid(n: int) -> NodeGrid:
    """Return the N-point GLL rule.

    Interior nodes are the zeros of P'_{N-1}, located by Newton iteration from
    Chebyshev-Lobatto starting points; weights are 2 / (N(N-1) P_{N-1}(x)^2).
    The rule is exact for polynomials of degree <= 2N-3.
    """
    if int(n) != n or n < 3:
        raise ValueError("GLL grid needs N >= 3, got %r" % (n,))
    x, w = _grid(int(n))
    return NodeGrid(x, w)


def legendre(deg: int, x):
    """P_deg(x) by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    p0 = np.ones_like(x)
    if deg == 0:
        return p0
    p1 = x.copy()
    for k in range(2, deg + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    return p1
