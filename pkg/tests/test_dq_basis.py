import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from gradqem.dq_basis import (CURV_L, CURV_R, SLOPE_L, SLOPE_R, hermite_basis, lagrange_derivatives,
                              lagrange_first, modify_for_boundary_dofs)
from gradqem.gll_quadrature import gll_grid


def augmented(coef, x):
    """Node values of a polynomial followed by end slopes and end curvatures."""
    d1, d2 = P.polyder(coef), P.polyder(coef, 2)
    return np.concatenate([P.polyval(x, coef), P.polyval([-1.0, 1.0], d1), P.polyval([-1.0, 1.0], d2)])


def test_linear_and_quadratic_lagrange():
    assert np.allclose(lagrange_first([-1.0, 1.0]), [[-0.5, 0.5], [-0.5, 0.5]])
    a = lagrange_first([-1.0, 0.0, 1.0])
    assert np.allclose(a, [[-1.5, 2, -0.5], [-0.5, 0, 0.5], [0.5, -2, 1.5]], atol=1e-15)


def test_duplicate_nodes_rejected():
    with pytest.raises(ValueError):
        lagrange_first([0.0, 0.5, 0.5])


def test_sine_derivative_spectral():
    g = gll_grid(9)
    d = lagrange_derivatives(g)
    assert np.abs(d.A @ np.sin(g.xi) - np.cos(g.xi)).max() < 1e-6


@pytest.mark.parametrize("n", range(4, 21))
def test_products_and_row_sums(n):
    d = lagrange_derivatives(gll_grid(n))
    assert np.abs(d.B - d.A @ d.A).max() < 1e-13 * np.abs(d.B).max()
    assert np.abs(d.C - d.B @ d.A).max() < 1e-13 * np.abs(d.C).max()
    for m in (d.A, d.B, d.C):
        assert np.abs(m.sum(axis=1)).max() < 1e-10


def test_monomial_reproduction():
    n = 10
    g = gll_grid(n)
    d = lagrange_derivatives(g)
    x = g.xi
    for p in range(n):
        f = x ** p
        ref1 = p * x ** (p - 1) if p >= 1 else 0 * x
        ref2 = p * (p - 1) * x ** (p - 2) if p >= 2 else 0 * x
        ref3 = p * (p - 1) * (p - 2) * x ** (p - 3) if p >= 3 else 0 * x
        sc = max(1.0, p ** 3)
        assert np.abs(d.A @ f - ref1).max() < 1e-9 * sc
        assert np.abs(d.B @ f - ref2).max() < 1e-9 * sc
        assert np.abs(d.C @ f - ref3).max() < 1e-9 * sc


def test_modified_structure():
    n = 9
    d = lagrange_derivatives(gll_grid(n))
    m = modify_for_boundary_dofs(d)
    assert m.Abar.shape == m.Bbar.shape == m.Cbar.shape == (n, n + 4)
    assert np.array_equal(m.Abar[:, :n], d.A) and not m.Abar[:, n:].any()
    assert np.array_equal(m.Bbar[1:-1, :n], d.B[1:-1])
    assert np.array_equal(m.Cbar[1:-1, :n], d.C[1:-1])
    assert not m.Bbar[1:-1, n:].any() and not m.Cbar[1:-1, n:].any()
    inner = slice(1, n - 1)
    for i in (0, n - 1):
        assert np.allclose(m.Bbar[i, :n], d.A[i, inner] @ d.A[inner, :])
        assert m.Bbar[i, n + SLOPE_L] == d.A[i, 0] and m.Bbar[i, n + SLOPE_R] == d.A[i, -1]
        assert m.Bbar[i, n + CURV_L] == 0 and m.Bbar[i, n + CURV_R] == 0
        assert m.Cbar[i, n + CURV_L] == d.A[i, 0] and m.Cbar[i, n + CURV_R] == d.A[i, -1]
        assert m.Cbar[i, n + SLOPE_L] == 0 and m.Cbar[i, n + SLOPE_R] == 0


def test_modified_quadratic_reproduction():
    g = gll_grid(6)
    m = modify_for_boundary_dofs(lagrange_derivatives(g))
    v = augmented([0, 0, 1], g.xi)
    assert np.allclose(m.Bbar @ v, 2.0, atol=1e-11)


def test_modified_abar_ignores_augmented_columns():
    g = gll_grid(5)
    m = modify_for_boundary_dofs(lagrange_derivatives(g))
    v = np.concatenate([g.xi ** 3, [7.0, -3.0, 11.0, 0.5]])
    assert np.allclose((m.Abar @ v)[1:-1], 3 * g.xi[1:-1] ** 2, atol=1e-13)


@pytest.mark.parametrize("n", [6, 8, 12])
def test_modified_third_derivative_reproduction(n):
    g = gll_grid(n)
    m = modify_for_boundary_dofs(lagrange_derivatives(g))
    coef = np.arange(1.0, n)        # degree n-2
    v = augmented(coef, g.xi)
    ref = P.polyval(g.xi, P.polyder(coef, 3))
    assert np.abs(m.Cbar @ v - ref).max() < 1e-8 * np.abs(ref).max()


def test_modify_requires_four_nodes():
    with pytest.raises(ValueError):
        modify_for_boundary_dofs(lagrange_derivatives(gll_grid(3)))


def test_hermite_interpolation_and_end_conditions():
    n = 8
    hb = hermite_basis(gll_grid(n))
    assert np.allclose(hb.G0[:, :n], np.eye(n), atol=1e-12)
    assert np.abs(hb.G0[:, n:]).max() < 1e-12
    s1, sn, c1, cn = (n + k for k in (SLOPE_L, SLOPE_R, CURV_L, CURV_R))
    assert hb.G1[0, s1] == pytest.approx(1.0, abs=1e-11) and abs(hb.G1[-1, s1]) < 1e-11
    assert hb.G1[-1, sn] == pytest.approx(1.0, abs=1e-11) and abs(hb.G1[0, sn]) < 1e-11
    assert hb.G2[0, c1] == pytest.approx(1.0, abs=1e-10) and hb.G2[-1, cn] == pytest.approx(1.0, abs=1e-10)
    for c in (c1, cn):
        assert abs(hb.G1[0, c]) < 1e-11 and abs(hb.G1[-1, c]) < 1e-11
    # slope functions carry no end curvature, nodal functions no end slope/curvature
    for c in (s1, sn):
        assert abs(hb.G2[0, c]) < 1e-10 and abs(hb.G2[-1, c]) < 1e-10
    assert np.abs(hb.G1[[0, -1], :n]).max() < 1e-10
    assert np.abs(hb.G2[[0, -1], :n]).max() < 1e-9
    assert hb.deriv(2) is hb.G2


def test_hermite_quintic():
    g = gll_grid(8)
    hb = hermite_basis(g)
    v = augmented([0, 0, 0, 0, 0, 1], g.xi)
    assert np.abs(hb.G2 @ v - 20 * g.xi ** 3).max() < 1e-9


@pytest.mark.parametrize("n", [6, 9, 13])
def test_hermite_completeness(n):
    g = gll_grid(n)
    hb = hermite_basis(g)
    rng = np.random.default_rng(n)
    coef = rng.standard_normal(n + 4)     # degree N+3
    v = augmented(coef, g.xi)
    for k in range(4):
        ref = P.polyval(g.xi, P.polyder(coef, k))
        assert np.abs(hb.deriv(k) @ v - ref).max() < 1e-8 * max(1.0, np.abs(ref).max())
