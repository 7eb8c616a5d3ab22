"""Randomised invariants (no published data involved)."""
import math

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from numpy.polynomial import polynomial as P

from gradqem import dense_linalg as dl
from gradqem.analytical_oracle import frequency_matrix
from gradqem.beam_qem import BeamBC, BeamModel, apply_beam_bc, assemble_hermite_beam, assemble_lagrange_beam, \
    beam_frequencies
from gradqem.dq_basis import hermite_basis, lagrange_derivatives, modify_for_boundary_dofs
from gradqem.gll_quadrature import gll_grid

FAST = settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
SLOW = settings(max_examples=8, deadline=None, suppress_health_check=[HealthCheck.too_slow])

seeds = st.integers(0, 2 ** 31 - 1)
sizes = st.integers(2, 14)
bcs = st.sampled_from(list(BeamBC))
bases = st.sampled_from(["lagrange", "hermite"])


def _spd(rng, n):
    a = rng.standard_normal((n, n))
    return a @ a.T + n * np.eye(n)


@FAST
@given(seeds, sizes)
def test_solve_residual(seed, n):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + n * np.eye(n)
    b = rng.standard_normal((n, 3))
    x = dl.solve_linear(a, b)
    assert np.abs(a @ x - b).max() <= 1e-10 * max(1.0, np.abs(b).max()) * np.abs(a).max()


@FAST
@given(seeds, sizes)
def test_eigen_trace_and_determinant(seed, n):
    rng = np.random.default_rng(seed)
    s = rng.standard_normal((n, n))
    s = s + s.T
    lam, v = dl.sym_eig(s)
    assert math.isclose(lam.sum(), np.trace(s), rel_tol=1e-9, abs_tol=1e-9 * n)
    m, e = dl.complex_det(s)
    det = (m * 10.0 ** e).real
    prod = np.prod(lam)
    assert abs(det - prod) <= 1e-8 * max(abs(prod), np.prod(np.abs(lam).clip(1.0)) * 1e-6)
    assert np.all(np.diff(lam) >= -1e-12)
    assert np.abs(v.T @ v - np.eye(n)).max() < 1e-10


@FAST
@given(seeds, st.integers(4, 12), st.data())
def test_nested_condensation(seed, n, data):
    rng = np.random.default_rng(seed)
    k = _spd(rng, n)
    perm = rng.permutation(n)
    nb = data.draw(st.integers(2, n - 2))
    b1 = data.draw(st.integers(1, nb - 1))
    b, d = perm[:nb], perm[nb:]
    direct = dl.schur(k, b, d)
    # condense b[:b1] first, then the rest
    rest = np.concatenate([b[b1:], d])
    k1 = dl.schur(k, b[:b1], rest)
    two_step = dl.schur(k1, np.arange(nb - b1), np.arange(nb - b1, rest.size))
    np.testing.assert_allclose(two_step, direct, rtol=1e-9, atol=1e-9 * np.abs(direct).max())
    # condensing nothing more is the identity
    np.testing.assert_allclose(dl.schur(direct, [], np.arange(d.size)), direct)


@FAST
@given(st.integers(3, 30), seeds)
def test_gll_exactness(n, seed):
    rng = np.random.default_rng(seed)
    deg = 2 * n - 3
    c = rng.standard_normal(deg + 1)
    grid = gll_grid(n)
    anti = P.polyint(c)
    exact = P.polyval(1.0, anti) - P.polyval(-1.0, anti)
    got = grid.integrate(P.polyval(grid.xi, c))
    assert abs(got - exact) <= 1e-12 * max(1.0, np.abs(c).sum())


@FAST
@given(st.integers(4, 20), seeds)
def test_dq_reproduces_polynomials(n, seed):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(n)              # degree N-1
    grid = gll_grid(n)
    d = lagrange_derivatives(grid)
    f = P.polyval(grid.xi, c)
    scale = np.abs(c).sum() * n ** 6
    for k, mat in enumerate((d.A, d.B, d.C), start=1):
        ref = P.polyval(grid.xi, P.polyder(c, k))
        assert np.abs(mat @ f - ref).max() <= 1e-13 * scale


@FAST
@given(st.integers(4, 16), seeds)
def test_modified_matrices_equal_plain_on_consistent_data(n, seed):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(n)
    grid = gll_grid(n)
    d = lagrange_derivatives(grid)
    mods = modify_for_boundary_dofs(d)
    w = P.polyval(grid.xi, c)
    d1, d2 = P.polyder(c), P.polyder(c, 2)
    full = np.concatenate([w, P.polyval([-1.0, 1.0], d1), P.polyval([-1.0, 1.0], d2)])
    scale = np.abs(c).sum() * n ** 6
    assert np.abs(mods.Abar @ full - d.A @ w).max() <= 1e-12 * scale
    assert np.abs(mods.Bbar @ full - d.B @ w).max() <= 1e-12 * scale
    assert np.abs(mods.Cbar @ full - d.C @ w).max() <= 1e-12 * scale


@FAST
@given(st.integers(5, 14), seeds)
def test_hermite_completeness(n, seed):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(n + 4)          # degree N+3
    grid = gll_grid(n)
    hb = hermite_basis(grid)
    x = grid.xi
    ders = [P.polyder(c, k) if k else c for k in range(4)]
    dofs = np.concatenate([P.polyval(x, c), P.polyval([-1.0, 1.0], ders[1]), P.polyval([-1.0, 1.0], ders[2])])
    scale = np.abs(c).sum() * n ** 6
    for k in range(4):
        assert np.abs(hb.deriv(k) @ dofs - P.polyval(x, ders[k])).max() <= 1e-11 * scale


@FAST
@given(st.integers(5, 14))
def test_hermite_end_identities(n):
    hb = hermite_basis(gll_grid(n))
    eye = np.eye(n + 4)
    np.testing.assert_allclose(hb.G0, eye[:n], atol=1e-12)
    for row, k, col in ((0, 1, n), (n - 1, 1, n + 1), (0, 2, n + 2), (n - 1, 2, n + 3)):
        np.testing.assert_allclose(hb.deriv(k)[row], eye[col], atol=1e-8 * n ** 4)


@FAST
@given(bcs, st.sampled_from([0.005, 0.05, 0.1]), seeds)
def test_determinant_column_scaling(bc, g, seed):
    rng = np.random.default_rng(seed)
    model = BeamModel(g=g)
    om = float(rng.uniform(5.0, 300.0))
    f = frequency_matrix(model, bc, om).F
    d = rng.uniform(0.1, 10.0, f.shape[1]) * np.exp(1j * rng.uniform(0, 2 * np.pi, f.shape[1]))
    m0, e0 = dl.complex_det(f)
    m1, e1 = dl.complex_det(f * d[None, :])
    ratio = (m1 / m0) * 10.0 ** (e1 - e0)
    assert abs(ratio / np.prod(d) - 1) < 1e-9


@SLOW
@given(bcs, bases, st.floats(0.0, 0.5), st.sampled_from([9, 11, 13]))
def test_stiffness_symmetric_psd(bc, basis, g, n):
    model = BeamModel(g=g)
    grid = gll_grid(n)
    sys = assemble_lagrange_beam(model, grid) if basis == "lagrange" else assemble_hermite_beam(model, grid)
    sys = apply_beam_bc(sys, bc, treatment="strong", g=g)
    kept = [q for q in range(n + 4) if q not in sys.eliminated]
    k = sys.K[np.ix_(kept, kept)]
    assert np.abs(k - k.T).max() <= 1e-12 * np.abs(k).max()
    lam = np.linalg.eigvalsh(k)
    assert lam.min() >= -1e-9 * lam.max()


@SLOW
@given(bcs, st.floats(0.0, 0.3), st.floats(0.0, 0.3))
def test_frequencies_increase_with_g(bc, g1, g2):
    lo, hi = sorted((g1, g2))
    a = beam_frequencies(BeamModel(g=lo), bc, "lagrange", 13, treatment="strong").elastic[:6]
    b = beam_frequencies(BeamModel(g=hi), bc, "lagrange", 13, treatment="strong").elastic[:6]
    assert np.all(b >= a * (1 - 1e-9))
