"""Scalar-heavy kernels with a numba path and a vectorised numpy path.

Set ``GRADQEM_NUMBA=0`` in the environment before import to force the
numpy implementations (useful for debugging and for the benchmark).
"""
import os
import math

import numpy as np

_WANT_NUMBA = os.environ.get("GRADQEM_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")

try:
    if not _WANT_NUMBA:
        raise ImportError("numba disabled by GRADQEM_NUMBA")
    from numba import njit
    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


EPS = 2.0 ** -52


# ---------------------------------------------------------------- LU ---

@njit(cache=True)
def _lu_loops(a):
    # in-place partial-pivot LU; returns (perm, sign, min_pivot_ratio)
    n = a.shape[0]
    perm = np.arange(n)
    sign = 1.0
    big = 0.0
    for i in range(n):
        for j in range(n):
            v = abs(a[i, j])
            if v > big:
                big = v
    if big == 0.0:
        big = 1.0
    worst = np.inf
    for k in range(n):
        p = k
        pv = abs(a[k, k])
        for i in range(k + 1, n):
            v = abs(a[i, k])
            if v > pv:
                pv = v
                p = i
        if p != k:
            for j in range(n):
                t = a[k, j]
                a[k, j] = a[p, j]
                a[p, j] = t
            t2 = perm[k]
            perm[k] = perm[p]
            perm[p] = t2
            sign = -sign
        r = pv / big
        if r < worst:
            worst = r
        if pv == 0.0:
            continue
        piv = a[k, k]
        for i in range(k + 1, n):
            f = a[i, k] / piv
            a[i, k] = f
            if f != 0.0:
                for j in range(k + 1, n):
                    a[i, j] -= f * a[k, j]
    return perm, sign, worst


def _lu_numpy(a):
    n = a.shape[0]
    perm = np.arange(n)
    sign = 1.0
    big = np.abs(a).max() if a.size else 1.0
    if big == 0.0:
        big = 1.0
    worst = np.inf
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        pv = abs(a[p, k])
        if p != k:
            a[[k, p]] = a[[p, k]]
            perm[[k, p]] = perm[[p, k]]
            sign = -sign
        worst = min(worst, pv / big)
        if pv == 0.0:
            continue
        f = a[k + 1:, k] / a[k, k]
        a[k + 1:, k] = f
        a[k + 1:, k + 1:] -= np.outer(f, a[k, k + 1:])
    return perm, sign, worst


@njit(cache=True)
def _lu_solve_loops(lu, perm, b):
    n = lu.shape[0]
    m = b.shape[1]
    x = np.empty_like(b)
    for i in range(n):
        for c in range(m):
            x[i, c] = b[perm[i], c]
    for c in range(m):
        for i in range(n):
            s = x[i, c]
            for j in range(i):
                s -= lu[i, j] * x[j, c]
            x[i, c] = s
        for i in range(n - 1, -1, -1):
            s = x[i, c]
            for j in range(i + 1, n):
                s -= lu[i, j] * x[j, c]
            x[i, c] = s / lu[i, i]
    return x


def _lu_solve_numpy(lu, perm, b):
    n = lu.shape[0]
    x = b[perm].copy()
    for i in range(n):
        x[i] -= lu[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - lu[i, i + 1:] @ x[i + 1:]) / lu[i, i]
    return x


# ------------------------------------------------ symmetric eigen ---

@njit(cache=True)
def _tridiag_loops(s):
    # Householder reduction, s = Q T Q^T; returns (d, e, Q) with e[i] = T[i+1, i]
    n = s.shape[0]
    a = s.copy()
    q = np.eye(n)
    v = np.zeros(n)
    p = np.zeros(n)
    for k in range(n - 2):
        alpha = 0.0
        for i in range(k + 1, n):
            alpha += a[i, k] * a[i, k]
        alpha = math.sqrt(alpha)
        if alpha == 0.0:
            continue
        if a[k + 1, k] > 0.0:
            alpha = -alpha
        vn = 0.0
        for i in range(k + 1, n):
            v[i] = a[i, k]
        v[k + 1] -= alpha
        for i in range(k + 1, n):
            vn += v[i] * v[i]
        vn = math.sqrt(vn)
        if vn == 0.0:
            continue
        for i in range(k + 1, n):
            v[i] /= vn
        kk = 0.0
        for i in range(k + 1, n):
            t = 0.0
            for j in range(k + 1, n):
                t += a[i, j] * v[j]
            p[i] = t
            kk += v[i] * t
        for i in range(k + 1, n):
            p[i] -= kk * v[i]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i, j] -= 2.0 * (v[i] * p[j] + p[i] * v[j])
        a[k + 1, k] = alpha
        a[k, k + 1] = alpha
        for i in range(k + 2, n):
            a[i, k] = 0.0
            a[k, i] = 0.0
        for r in range(n):
            t = 0.0
            for j in range(k + 1, n):
                t += q[r, j] * v[j]
            for j in range(k + 1, n):
                q[r, j] -= 2.0 * t * v[j]
    d = np.zeros(n)
    e = np.zeros(n)
    for i in range(n):
        d[i] = a[i, i]
    for i in range(n - 1):
        e[i] = a[i + 1, i]
    return d, e, q


def _tridiag_numpy(s):
    n = s.shape[0]
    a = s.copy()
    q = np.eye(n)
    for k in range(n - 2):
        x = a[k + 1:, k]
        alpha = np.sqrt(x @ x)
        if alpha == 0.0:
            continue
        if x[0] > 0.0:
            alpha = -alpha
        v = x.copy()
        v[0] -= alpha
        vn = np.sqrt(v @ v)
        if vn == 0.0:
            continue
        v /= vn
        blk = a[k + 1:, k + 1:]
        p = blk @ v
        p -= (v @ p) * v
        blk -= 2.0 * (np.outer(v, p) + np.outer(p, v))
        a[k + 1:, k] = 0.0
        a[k, k + 1:] = 0.0
        a[k + 1, k] = alpha
        a[k, k + 1] = alpha
        qb = q[:, k + 1:]
        qb -= 2.0 * np.outer(qb @ v, v)
    d = np.diag(a).copy()
    e = np.zeros(n)
    e[:n - 1] = np.diag(a, -1)
    return d, e, q


@njit(cache=True)
def _tql2_loops(d, e, v, maxit):
    # implicit QL on a symmetric tridiagonal matrix; rotations accumulated into v
    n = d.shape[0]
    f = 0.0
    tst1 = 0.0
    for l in range(n):
        tst1 = max(tst1, abs(d[l]) + abs(e[l]))
        m = l
        while m < n - 1:
            if abs(e[m]) <= EPS * tst1:
                break
            m += 1
        if m > l:
            it = 0
            while True:
                it += 1
                if it > maxit:
                    return False
                g = d[l]
                p = (d[l + 1] - g) / (2.0 * e[l])
                r = math.hypot(p, 1.0)
                if p < 0:
                    r = -r
                d[l] = e[l] / (p + r)
                d[l + 1] = e[l] * (p + r)
                dl1 = d[l + 1]
                h = g - d[l]
                for i in range(l + 2, n):
                    d[i] -= h
                f += h
                p = d[m]
                c = 1.0
                c2 = c
                c3 = c
                el1 = e[l + 1]
                s = 0.0
                s2 = 0.0
                for i in range(m - 1, l - 1, -1):
                    c3 = c2
                    c2 = c
                    s2 = s
                    g = c * e[i]
                    h = c * p
                    r = math.hypot(p, e[i])
                    e[i + 1] = s * r
                    s = e[i] / r
                    c = p / r
                    p = c * d[i] - s * g
                    d[i + 1] = h + s * (c * g + s * d[i])
                    for k in range(n):
                        h = v[k, i + 1]
                        v[k, i + 1] = s * v[k, i] + c * h
                        v[k, i] = c * v[k, i] - s * h
                p = -s * s2 * c3 * el1 * e[l] / dl1
                e[l] = s * p
                d[l] = c * p
                if abs(e[l]) <= EPS * tst1:
                    break
        d[l] = d[l] + f
        e[l] = 0.0
    return True


def _tql2_numpy(d, e, v, maxit):
    n = d.shape[0]
    f = 0.0
    tst1 = 0.0
    for l in range(n):
        tst1 = max(tst1, abs(d[l]) + abs(e[l]))
        m = l
        while m < n - 1 and abs(e[m]) > EPS * tst1:
            m += 1
        if m > l:
            it = 0
            while True:
                it += 1
                if it > maxit:
                    return False
                g = d[l]
                p = (d[l + 1] - g) / (2.0 * e[l])
                r = math.hypot(p, 1.0)
                if p < 0:
                    r = -r
                d[l] = e[l] / (p + r)
                d[l + 1] = e[l] * (p + r)
                dl1 = d[l + 1]
                h = g - d[l]
                d[l + 2:] -= h
                f += h
                p = d[m]
                c = c2 = c3 = 1.0
                el1 = e[l + 1]
                s = s2 = 0.0
                for i in range(m - 1, l - 1, -1):
                    c3 = c2
                    c2 = c
                    s2 = s
                    g = c * e[i]
                    h = c * p
                    r = math.hypot(p, e[i])
                    e[i + 1] = s * r
                    s = e[i] / r
                    c = p / r
                    p = c * d[i] - s * g
                    d[i + 1] = h + s * (c * g + s * d[i])
                    col = v[:, i + 1].copy()
                    v[:, i + 1] = s * v[:, i] + c * col
                    v[:, i] = c * v[:, i] - s * col
                p = -s * s2 * c3 * el1 * e[l] / dl1
                e[l] = s * p
                d[l] = c * p
                if abs(e[l]) <= EPS * tst1:
                    break
        d[l] += f
        e[l] = 0.0
    return True


# --------------------------------------------------------- GLL ---

@njit(cache=True)
def _gll_newton_loops(n, tol, maxit):
    # nodes ascending; returns (x, P_{n-1}(x), iterations used)
    deg = n - 1
    x = np.empty(n)
    for i in range(n):
        x[i] = -math.cos(math.pi * i / deg)
    pn = np.zeros(n)
    used = 0
    for it in range(maxit):
        used = it + 1
        worst = 0.0
        for i in range(n):
            p0 = 1.0
            p1 = x[i]
            for k in range(2, deg + 1):
                p2 = ((2 * k - 1) * x[i] * p1 - (k - 1) * p0) / k
                p0 = p1
                p1 = p2
            # p1 = P_deg, p0 = P_{deg-1}; Newton on (x P_deg - P_{deg-1}) as in standard LGL code
            dx = (x[i] * p1 - p0) / (n * p1)
            x[i] -= dx
            pn[i] = p1
            if abs(dx) > worst:
                worst = abs(dx)
        if worst < tol:
            break
    for i in range(n):
        p0 = 1.0
        p1 = x[i]
        for k in range(2, deg + 1):
            p2 = ((2 * k - 1) * x[i] * p1 - (k - 1) * p0) / k
            p0 = p1
            p1 = p2
        pn[i] = p1
    return x, pn, used


def _gll_newton_numpy(n, tol, maxit):
    deg = n - 1
    x = -np.cos(np.pi * np.arange(n) / deg)
    used = 0

    def legendre(x):
        p0 = np.ones_like(x)
        p1 = x.copy()
        for k in range(2, deg + 1):
            p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
        return p0, p1

    for it in range(maxit):
        used = it + 1
        p0, p1 = legendre(x)
        dx = (x * p1 - p0) / (n * p1)
        x = x - dx
        if np.max(np.abs(dx)) < tol:
            break
    return x, legendre(x)[1], used


# ----------------------------------------- Lagrange derivative ---

@njit(cache=True)
def _lagrange_a_loops(x):
    n = x.shape[0]
    a = np.zeros((n, n))
    # M(i) = prod_{k != i} (x_i - x_k)
    mi = np.ones(n)
    for i in range(n):
        for k in range(n):
            if k != i:
                mi[i] *= x[i] - x[k]
    for i in range(n):
        s = 0.0
        for j in range(n):
            if j != i:
                a[i, j] = mi[i] / ((x[i] - x[j]) * mi[j])
                s += 1.0 / (x[i] - x[j])
        a[i, i] = s
    return a


def _lagrange_a_numpy(x):
    n = x.shape[0]
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    mi = diff.prod(axis=1)
    a = mi[:, None] / (diff * mi[None, :])
    inv = 1.0 / diff
    np.fill_diagonal(inv, 0.0)
    np.fill_diagonal(a, inv.sum(axis=1))
    return a


# ------------------------------------------------- complex det ---

@njit(cache=True)
def _det_mant_exp_loops(a):
    # determinant of a square (complex) matrix as mantissa * 10**exponent
    n = a.shape[0]
    m = 1.0 + 0.0j
    ex = 0
    for k in range(n):
        p = k
        pv = abs(a[k, k])
        for i in range(k + 1, n):
            if abs(a[i, k]) > pv:
                pv = abs(a[i, k])
                p = i
        if pv == 0.0:
            return 0.0 + 0.0j, 0
        if p != k:
            for j in range(n):
                t = a[k, j]
                a[k, j] = a[p, j]
                a[p, j] = t
            m = -m
        piv = a[k, k]
        for i in range(k + 1, n):
            f = a[i, k] / piv
            for j in range(k + 1, n):
                a[i, j] -= f * a[k, j]
        m *= piv
        am = abs(m)
        if am != 0.0:
            sh = int(math.floor(math.log10(am)))
            m /= 10.0 ** sh
            ex += sh
    return m, ex


def _det_mant_exp_numpy(a):
    n = a.shape[0]
    m = 1.0 + 0.0j
    ex = 0
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if a[p, k] == 0:
            return 0.0 + 0.0j, 0
        if p != k:
            a[[k, p]] = a[[p, k]]
            m = -m
        f = a[k + 1:, k] / a[k, k]
        a[k + 1:, k + 1:] -= np.outer(f, a[k, k + 1:])
        m *= a[k, k]
        sh = int(math.floor(math.log10(abs(m))))
        m /= 10.0 ** sh
        ex += sh
    return complex(m), ex


if HAS_NUMBA:
    lu_inplace = _lu_loops
    lu_solve = _lu_solve_loops
    tridiagonalize = _tridiag_loops
    tql2 = _tql2_loops
    gll_newton = _gll_newton_loops
    lagrange_first = _lagrange_a_loops
    det_mant_exp = _det_mant_exp_loops
else:
    lu_inplace = _lu_numpy
    lu_solve = _lu_solve_numpy
    tridiagonalize = _tridiag_numpy
    tql2 = _tql2_numpy
    gll_newton = _gll_newton_numpy
    lagrange_first = _lagrange_a_numpy
    det_mant_exp = _det_mant_exp_numpy

# both families, for the benchmark and the cross-check tests
NUMPY_KERNELS = {
    "lu_inplace": _lu_numpy, "lu_solve": _lu_solve_numpy, "tridiagonalize": _tridiag_numpy,
    "tql2": _tql2_numpy, "gll_newton": _gll_newton_numpy, "lagrange_first": _lagrange_a_numpy,
    "det_mant_exp": _det_mant_exp_numpy,
}
LOOP_KERNELS = {
    "lu_inplace": _lu_loops, "lu_solve": _lu_solve_loops, "tridiagonalize": _tridiag_loops,
    "tql2": _tql2_loops, "gll_newton": _gll_newton_loops, "lagrange_first": _lagrange_a_loops,
    "det_mant_exp": _det_mant_exp_loops,
}
