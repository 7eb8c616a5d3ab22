"""Small dense linear algebra: solve, symmetric eigen, Schur complement, det.

Everything here is written out by hand on top of numpy arrays; the scalar
inner loops live in ``_kernels`` (numba when available).
"""
from __future__ import annotations

import numpy as np

from . import _kernels as _k


class SingularMatrixError(ArithmeticError):
    pass


class NonSymmetricError(ValueError):
    pass


class ConvergenceError(ArithmeticError):
    pass


PIVOT_TOL = 1e-13


def _as2d(b):
    b = np.asarray(b)
    return (b[:, None], True) if b.ndim == 1 else (b, False)


def solve_linear(a, b, pivot_tol: float = PIVOT_TOL):
    """Solve ``a @ x = b`` by row-equilibrated LU with partial pivoting.

    Rows are scaled by their largest entry before factorisation, which
    keeps blocks whose rows carry very different powers of g well behaved.

    Raises
    ------
    SingularMatrixError
        if a pivot falls below ``pivot_tol`` times the largest initial entry.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("a must be square")
    b2, vec = _as2d(np.asarray(b, dtype=float))
    if b2.shape[0] != a.shape[0]:
        raise ValueError("row count of b must equal order of a")
    n = a.shape[0]
    if n == 0:
        return b2[:, 0].copy() if vec else b2.copy()
    rmax = np.abs(a).max(axis=1)
    if np.any(rmax == 0.0):
        raise SingularMatrixError("zero row")
    lu = np.ascontiguousarray(a / rmax[:, None])
    rhs = np.ascontiguousarray(b2 / rmax[:, None])
    perm, _, worst = _k.lu_inplace(lu)
    if worst < pivot_tol:
        raise SingularMatrixError(f"pivot ratio {worst:.3e} below {pivot_tol:g}")
    x = _k.lu_solve(lu, perm, rhs)
    return x[:, 0] if vec else x


def check_symmetric(s, rtol: float = 1e-9):
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise NonSymmetricError("matrix is not square")
    scale = max(np.abs(s).max(), np.finfo(float).tiny)
    if np.abs(s - s.T).max() > rtol * scale:
        raise NonSymmetricError("matrix is not symmetric to %g relative" % rtol)
    return s


def sym_eig(s, maxit: int = 60):
    """Eigen-decomposition of a real symmetric matrix.

    Householder tridiagonalisation followed by implicit-shift QL.
    Returns ``(w, v)`` with ``w`` ascending and orthonormal columns ``v``.
    """
    s = check_symmetric(s)
    n = s.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0))
    s = 0.5 * (s + s.T)
    d, e, q = _k.tridiagonalize(np.ascontiguousarray(s))
    v = np.ascontiguousarray(q)
    if not _k.tql2(d, e, v, maxit):
        raise ConvergenceError("QL iteration did not converge in %d sweeps" % maxit)
    order = np.argsort(d, kind="stable")
    return d[order], v[:, order]


def cholesky(a):
    """Lower Cholesky factor of an SPD matrix (plain column algorithm)."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    low = np.zeros_like(a)
    for j in range(n):
        dj = a[j, j] - low[j, :j] @ low[j, :j]
        if dj <= 0.0:
            raise SingularMatrixError("matrix not positive definite at column %d" % j)
        low[j, j] = np.sqrt(dj)
        low[j + 1:, j] = (a[j + 1:, j] - low[j + 1:, :j] @ low[j, :j]) / low[j, j]
    return low


def _tri_solve_lower(low, b):
    x = np.array(b, dtype=float)
    for i in range(low.shape[0]):
        x[i] = (x[i] - low[i, :i] @ x[:i]) / low[i, i]
    return x


def sym_eig_generalized(k, m):
    """Solve ``k v = lam m v`` for symmetric k and SPD m (Cholesky reduction).

    Eigenvectors are m-orthonormal.
    """
    k = check_symmetric(k)
    m = check_symmetric(m)
    low = cholesky(m)
    y = _tri_solve_lower(low, k)              # L^-1 K
    c = _tri_solve_lower(low, y.T).T          # L^-1 K L^-T
    w, z = sym_eig(0.5 * (c + c.T))
    # back transform: v = L^-T z
    v = np.zeros_like(z)
    lt = low.T
    for i in range(lt.shape[0] - 1, -1, -1):
        v[i] = (z[i] - lt[i, i + 1:] @ v[i + 1:]) / lt[i, i]
    return w, v


def null_space(c, rtol: float = 1e-10):
    """Orthonormal basis of ``{x : c @ x = 0}`` via column-pivoted Householder QR of c^T."""
    c = np.atleast_2d(np.asarray(c, dtype=float))
    n = c.shape[1]
    if c.shape[0] == 0:
        return np.eye(n)
    a = c.T.copy()                       # n x r
    r = a.shape[1]
    q = np.eye(n)
    norms = np.sqrt((a * a).sum(axis=0))
    ref = norms.max() if r else 0.0
    rank = 0
    for k in range(min(n, r)):
        cn = np.sqrt((a[k:, k:] ** 2).sum(axis=0))
        j = k + int(np.argmax(cn))
        if cn[j - k] <= rtol * ref:
            break
        a[:, [k, j]] = a[:, [j, k]]
        x = a[k:, k]
        alpha = -np.copysign(np.sqrt(x @ x), x[0] if x[0] != 0 else 1.0)
        v = x.copy()
        v[0] -= alpha
        v /= np.sqrt(v @ v)
        a[k:, k:] -= 2.0 * np.outer(v, v @ a[k:, k:])
        q[:, k:] -= 2.0 * np.outer(q[:, k:] @ v, v)
        rank += 1
    return q[:, rank:]


def static_condense(k, b_index, d_index):
    """Schur complement ``k_dd - k_db k_bb^-1 k_bd`` (symmetrised).

    Also returns the recovery operator ``R = -k_bb^-1 k_bd`` so callers can
    rebuild boundary dofs from a displacement vector.
    """
    k = np.asarray(k, dtype=float)
    b = np.asarray(b_index, dtype=int)
    d = np.asarray(d_index, dtype=int)
    if np.intersect1d(b, d).size:
        raise ValueError("index sets overlap")
    kdd = k[np.ix_(d, d)]
    if b.size == 0:
        return 0.5 * (kdd + kdd.T), np.zeros((0, d.size))
    kbb = k[np.ix_(b, b)]
    kbd = k[np.ix_(b, d)]
    kdb = k[np.ix_(d, b)]
    rec = -solve_linear(kbb, kbd)
    kc = kdd + kdb @ rec
    return 0.5 * (kc + kc.T), rec


def schur(k, b_index, d_index):
    return static_condense(k, b_index, d_index)[0]


def complex_det(f):
    """Determinant as ``(mantissa, exponent)`` with value ``mantissa * 10**exponent``.

    1 <= |mantissa| < 10 unless the determinant is exactly zero.
    """
    f = np.array(f, dtype=complex)
    if f.ndim != 2 or f.shape[0] != f.shape[1]:
        raise ValueError("square matrix required")
    if f.shape[0] == 0:
        return 1.0 + 0.0j, 0
    m, e = _k.det_mant_exp(np.ascontiguousarray(f))
    return complex(m), int(e)


def det_value(f):
    m, e = complex_det(f)
    return m * 10.0 ** e
