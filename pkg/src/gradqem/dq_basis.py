"""Differentiation matrices on a GLL grid.

Lagrange weighting coefficients A, B, C, their boundary-augmented forms
(Abar, Bbar, Cbar) and the C2 Hermite basis derivative matrices G1..G3.

Augmented column convention (0-based): columns 0..N-1 nodal values,
N -> w'(left), N+1 -> w'(right), N+2 -> w''(left), N+3 -> w''(right).
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from numpy.polynomial import polynomial as P

from . import _kernels as _k
from .gll_quadrature import NodeGrid

SLOPE_L, SLOPE_R, CURV_L, CURV_R = 0, 1, 2, 3


def aug_index(n: int, which: int) -> int:
    return n + which


@dataclass(frozen=True)
class DerivativeSet:
    grid: NodeGrid
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray


@dataclass(frozen=True)
class ModifiedDerivativeSet:
    grid: NodeGrid
    Abar: np.ndarray
    Bbar: np.ndarray
    Cbar: np.ndarray


@dataclass(frozen=True)
class HermiteBasisSet:
    grid: NodeGrid
    G0: np.ndarray
    G1: np.ndarray
    G2: np.ndarray
    G3: np.ndarray

    def deriv(self, k: int) -> np.ndarray:
        return (self.G0, self.G1, self.G2, self.G3)[k]


def lagrange_first(xi) -> np.ndarray:
    """A_ij = L_j'(xi_i) for an arbitrary set of distinct nodes."""
    x = np.ascontiguousarray(xi, dtype=float)
    if np.unique(x).size != x.size:
        raise ValueError("duplicate nodes")
    return np.asarray(_k.lagrange_first(x))


def _negative_sum(m):
    # reset the diagonal so each row annihilates constants to roundoff
    m = m.copy()
    np.fill_diagonal(m, 0.0)
    np.fill_diagonal(m, -m.sum(axis=1))
    return m


def lagrange_derivatives(grid: NodeGrid) -> DerivativeSet:
    """A from the Lagrange weight formula, B = A A and C = B A.

    The products lose the exact zero row sums to roundoff that grows with
    the entry size (|C| ~ N^6), so their diagonals are re-set by the
    negative-sum rule; the change is at roundoff level.
    """
    a = lagrange_first(grid.xi)
    b = _negative_sum(a @ a)
    c = _negative_sum(b @ a)
    return DerivativeSet(grid, a, b, c)


def modify_for_boundary_dofs(d: DerivativeSet) -> ModifiedDerivativeSet:
    """Augment A, B, C with columns for end slopes and end curvatures.

    Interior rows are copied. At the two end rows the second derivative is
    rebuilt from interior first derivatives plus the end slope dofs, and the
    third derivative from interior second derivatives plus the end curvature
    dofs (the derivative of the nodal B field is taken with A on the left).
    """
    a, b = d.A, d.B
    n = a.shape[0]
    if n < 4:
        raise ValueError("need N >= 4 for augmented matrices")
    abar = np.zeros((n, n + 4))
    bbar = np.zeros((n, n + 4))
    cbar = np.zeros((n, n + 4))
    abar[:, :n] = a
    bbar[:, :n] = b
    cbar[:, :n] = d.C
    inner = slice(1, n - 1)
    for i in (0, n - 1):
        bbar[i, :n] = a[i, inner] @ a[inner, :]
        bbar[i, n + SLOPE_L] = a[i, 0]
        bbar[i, n + SLOPE_R] = a[i, n - 1]
        cbar[i, :n] = a[i, inner] @ b[inner, :]
        cbar[i, n + CURV_L] = a[i, 0]
        cbar[i, n + CURV_R] = a[i, n - 1]
    return ModifiedDerivativeSet(d.grid, abar, bbar, cbar)


def modified_set(grid: NodeGrid) -> ModifiedDerivativeSet:
    return modify_for_boundary_dofs(lagrange_derivatives(grid))


def _factor_polys(x):
    """Polynomial co-factors q_j with Gamma_j = L_j * q_j (numpy power-basis coefficients)."""
    n = x.size
    a = lagrange_first(x)
    b = a @ a
    lin = lambda r: np.array([-r, 1.0])
    qs = [None] * (n + 4)
    for j, (slope_col, curv_col) in ((0, (SLOPE_L, CURV_L)), (n - 1, (SLOPE_R, CURV_R))):
        jo = n - 1 - j
        d = x[j] - x[jo]
        l1, l2 = a[j, j], b[j, j]
        sq_j = P.polypow(lin(x[j]), 2)
        sq_o = P.polypow(lin(x[jo]), 2)
        q_curv = P.polymul(sq_j, sq_o) / (2.0 * d * d)
        q_slope = P.polysub(P.polymul(lin(x[j]), sq_o) / (d * d), (2.0 * l1 + 4.0 / d) * q_curv)
        q_disp = sq_o / (d * d)
        q_disp = P.polysub(q_disp, (l1 + 2.0 / d) * q_slope)
        q_disp = P.polysub(q_disp, (l2 + 4.0 * l1 / d + 2.0 / (d * d)) * q_curv)
        qs[j] = q_disp
        qs[n + slope_col] = q_slope
        qs[n + curv_col] = q_curv
    ends = P.polymul(P.polypow(lin(x[0]), 2), P.polypow(lin(x[-1]), 2))
    for j in range(1, n - 1):
        qs[j] = ends / ((x[j] - x[0]) ** 2 * (x[j] - x[-1]) ** 2)
    owner = list(range(n)) + [0, n - 1, 0, n - 1]
    return qs, owner, a


def hermite_basis(grid: NodeGrid) -> HermiteBasisSet:
    """Nodal values and first three derivatives of the N+4 C2 Hermite functions.

    Each function is a Lagrange polynomial times a low-degree co-factor, so its
    derivatives follow from the Leibniz rule using exact nodal Lagrange
    derivatives (powers of A) and analytic co-factor derivatives.
    """
    x = np.asarray(grid.xi, dtype=float)
    n = x.size
    if n < 4:
        raise ValueError("need N >= 4 for the Hermite basis")
    qs, owner, a = _factor_polys(x)
    lag = [np.eye(n), a, a @ a, a @ a @ a]       # L_j^(m)(x_i)
    out = [np.zeros((n, n + 4)) for _ in range(4)]
    for col in range(n + 4):
        j = owner[col]
        qd = [P.polyval(x, P.polyder(qs[col], m)) if m else P.polyval(x, qs[col]) for m in range(4)]
        for k in range(4):
            acc = np.zeros(n)
            for m in range(k + 1):
                acc += comb(k, m) * lag[m][:, j] * qd[k - m]
            out[k][:, col] = acc
    return HermiteBasisSet(grid, *out)
