"""Shared eigen-pipeline for beam and plate elements.

kept dofs -> optional displacement constraints (null-space reduction) ->
static condensation of massless dofs -> (generalised) symmetric eigenproblem
-> classification into rigid, elastic and spurious modes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import dense_linalg as dl

NEG_TOL = 1e-6          # relative tolerance on negative eigenvalues
RIGID_REL = 1e-4        # rigid if omega_bar < RIGID_REL * max(first elastic, 1)
SPURIOUS_RATIO = 1e-3   # classical-energy share below which a mode is spurious
NOISE_FACTOR = 100.0    # multiple of the roundoff level treated as zero frequency


class AssemblyInconsistencyError(ArithmeticError):
    pass


@dataclass
class ModalResult:
    """Sorted nondimensional frequencies and mode shapes.

    ``omega_bar`` holds rigid modes (reported as 0 when numerically tiny)
    followed by elastic modes; spurious zero-classical-energy modes of the
    Hermite-based elements are split off into ``spurious_omega_bar``.
    ``mode_shapes`` columns are nodal displacement vectors over the
    retained displacement set ``d_index``.
    """

    omega_bar: np.ndarray
    mode_shapes: np.ndarray
    rigid_mode_count: int
    d_index: np.ndarray
    spurious_omega_bar: np.ndarray = field(default_factory=lambda: np.zeros(0))
    energy_ratio: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def spurious_mode_count(self) -> int:
        return int(self.spurious_omega_bar.size)

    @property
    def elastic(self) -> np.ndarray:
        return self.omega_bar[self.rigid_mode_count:]


KERNEL_RTOL = 1e-12     # eigenvalue / max below which a stiffness direction is a null direction


def admissible_motions(vectors, eliminated, constraints) -> np.ndarray:
    """Combinations of ``vectors`` (columns) compatible with the essential conditions."""
    r = np.asarray(vectors, dtype=float)
    if r.size == 0:
        return np.zeros((r.shape[0], 0))
    r = r / np.abs(r).max(axis=0)
    rows = [r[sorted(int(e) for e in eliminated)]] if len(eliminated) else []
    if constraints is not None and len(constraints):
        c = np.asarray(constraints, dtype=float)
        # each row against its own size: products at roundoff level count as zero
        c = c / np.maximum(np.abs(c).sum(axis=1), 1e-300)[:, None]
        rows.append(c @ r)
    if not rows:
        return r
    e = np.vstack(rows)
    e = np.where(np.abs(e) < 1e-9, 0.0, e)
    if not np.any(e):
        return r
    return r @ dl.null_space(e, rtol=1e-8)


def admissible_rigid_dim(rigid_vectors, eliminated, constraints) -> int:
    """Dimension of the rigid-body motions compatible with the essential conditions."""
    return admissible_motions(rigid_vectors, eliminated, constraints).shape[1]


def _null_directions(k):
    lam, v = dl.sym_eig(k / max(np.abs(k).max(), 1e-300))
    return v[:, lam < KERNEL_RTOL]


def hourglass_constraints(k_cl, k_grad, eliminated, constraints, linear, quadratic, gradient=True):
    """Rows that remove quadrature hourglass patterns.

    An N-point rule samples each strain at N nodes, so an interpolation with
    more dofs has strain-free patterns that are not polynomial motions.
    Patterns invisible to the classical strain carry only gradient stiffness
    (frequency growing like g); patterns invisible to the gradient strain
    carry only classical stiffness. Each pattern h is removed by asking
    admissible vectors v to satisfy h' K_other v = 0, a g-independent
    Rayleigh-Ritz restriction. Patterns are shifted by admissible
    polynomials until their rows annihilate those polynomials, so polynomial
    motions are never restricted.

    ``linear`` / ``quadratic`` hold the dof vectors of polynomials of degree
    <= 1 / <= 2 (columns). With ``gradient=False`` (g == 0) only the
    classical family is removed.
    """
    n = k_cl.shape[0]
    elim = set(int(e) for e in eliminated)
    kept = np.array([q for q in range(n) if q not in elim], dtype=int)
    rows = []
    families = [(k_cl, k_grad, linear)]
    if gradient:
        families.append((k_grad, k_cl, quadratic))
    for ka, kb, polys in families:
        ker = _null_directions(ka[np.ix_(kept, kept)])
        if not ker.shape[1]:
            continue
        adm = admissible_motions(polys, elim, constraints)[kept]
        kbk = kb[np.ix_(kept, kept)]
        if adm.shape[1]:
            ker = ker @ dl.null_space(adm.T @ ker, rtol=1e-6)
            # shift each pattern by polynomials so its row annihilates them
            gram = adm.T @ kbk @ adm
            lam, v = dl.sym_eig(0.5 * (gram + gram.T))
            keep = lam > 1e-10 * max(lam.max(), 1e-300)
            if np.any(keep):
                pinv = (v[:, keep] / lam[keep]) @ v[:, keep].T
                ker = ker - adm @ (pinv @ (adm.T @ kbk @ ker))
        for h in ker.T:
            r = np.zeros(n)
            r[kept] = h @ kbk
            big = np.abs(r).max()
            if big > 0:
                rows.append(r / big)
    return np.array(rows) if rows else np.zeros((0, n))


def reduce_and_solve(k, k_cl, m_full, n_disp, eliminated, constraints, scale,
                     filter_spurious=False, mode_count=None, rigid_vectors=None, energy_filter=True):
    """Solve the free-vibration problem of an assembled single element.

    Parameters
    ----------
    k, k_cl : (n, n) arrays
        Total and classical-only stiffness over all dofs.
    m_full : (n_disp,) array
        Lumped mass of the displacement dofs (the first ``n_disp`` dofs).
    eliminated : iterable of int
        Dofs set to zero by essential conditions.
    constraints : (r, n) array or None
        Extra homogeneous linear conditions on the kept dofs.
    scale : float
        Factor converting sqrt(eigenvalue) to the nondimensional frequency.
    filter_spurious : bool
        Split off zero-energy modes beyond the admissible rigid motions and,
        with ``energy_filter``, modes whose classical-energy share is below
        SPURIOUS_RATIO.
    """
    n = k.shape[0]
    elim = set(int(e) for e in eliminated)
    kept = np.array([q for q in range(n) if q not in elim], dtype=int)
    d_idx = kept[kept < n_disp]
    b_idx = kept[kept >= n_disp]

    t = None
    c_all = None
    if constraints is not None and len(constraints):
        c_all = np.asarray(constraints, dtype=float)
        big = np.abs(c_all).max(axis=1)
        c_all = c_all[big > 0]
        if c_all.shape[0] and not np.any(c_all[:, b_idx]):
            c = c_all[:, d_idx]
            big = np.abs(c).max(axis=1)
            c = c[big > 1e-12 * max(big.max(), 1e-300)]
            if c.shape[0]:
                t = dl.null_space(c)
            c_all = None
        elif not c_all.shape[0]:
            c_all = None

    order = np.concatenate([d_idx, b_idx])
    m_d = np.asarray(m_full, dtype=float)[d_idx]
    if c_all is not None:
        # constraints reach the massless dofs: restrict the whole kept space,
        # then split the restricted space into massive and massless parts
        z = dl.null_space(c_all[:, order])
        kz = z.T @ k[np.ix_(order, order)] @ z
        mz = z.T @ (np.concatenate([m_d, np.zeros(b_idx.size)])[:, None] * z)
        mu, q = dl.sym_eig(0.5 * (mz + mz.T))
        heavy = mu > 1e-12 * max(mu.max(), 1e-300)
        q = np.hstack([q[:, heavy], q[:, ~heavy]])
        z = z @ q
        kr = q.T @ kz @ q
        kr = 0.5 * (kr + kr.T)
        nd = int(heavy.sum())
        kbar, rec = dl.static_condense(kr, np.arange(nd, kr.shape[0]), np.arange(nd))
        s = 1.0 / np.sqrt(mu[heavy])
        lam, y = dl.sym_eig(kbar * s[:, None] * s[None, :])
        y = y * s[:, None]
    else:
        nd = d_idx.size if t is None else t.shape[1]
        nb = b_idx.size
        z = np.zeros((d_idx.size + nb, nd + nb))
        z[:d_idx.size, :nd] = np.eye(nd) if t is None else t
        z[d_idx.size:, nd:] = np.eye(nb)
        kr = z.T @ k[np.ix_(order, order)] @ z
        kr = 0.5 * (kr + kr.T)
        kbar, rec = dl.static_condense(kr, np.arange(nd, nd + nb), np.arange(nd))
        if t is None:
            s = 1.0 / np.sqrt(m_d)
            lam, y = dl.sym_eig(kbar * s[:, None] * s[None, :])
            y = y * s[:, None]
        else:
            mu = t.T @ (m_d[:, None] * t)
            lam, y = dl.sym_eig_generalized(kbar, 0.5 * (mu + mu.T))

    lam_max = max(np.abs(lam).max(), 1e-300) if lam.size else 1.0
    if lam.size and lam.min() < -NEG_TOL * lam_max:
        raise AssemblyInconsistencyError(
            "negative eigenvalue %.3e (max %.3e): stiffness not semidefinite" % (lam.min(), lam_max))
    om = np.sign(lam) * np.sqrt(np.abs(lam)) * scale
    om = np.where(om < 0.0, 0.0, om)

    # full vectors over kept dofs (reduced ordering) for energy bookkeeping
    full = np.vstack([y, rec @ y])
    vec = z @ full                         # in 'order' dof ordering
    kk = k[np.ix_(order, order)]
    kc = k_cl[np.ix_(order, order)]
    e_tot = np.einsum("ij,ij->j", vec, kk @ vec)
    e_cl = np.einsum("ij,ij->j", vec, kc @ vec)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(e_tot > 0, e_cl / e_tot, 1.0)

    # eigenvalue roundoff is ~eps * lam_max, i.e. sqrt(eps) * omega_max in frequency
    floor = NOISE_FACTOR * np.sqrt(np.finfo(float).eps) * (om.max() if om.size else 0.0)
    first_el = next((w for w in om if w > max(floor, 1e-2)), 1.0)
    thr = max(RIGID_REL * max(first_el, 1.0), floor)
    rigid = om < thr
    spurious = (~rigid) & (ratio < SPURIOUS_RATIO) if (filter_spurious and energy_filter) else np.zeros_like(rigid)
    if filter_spurious and rigid_vectors is not None:
        # zero-energy modes beyond the admissible rigid-body motions are hourglass modes
        n_adm = admissible_rigid_dim(rigid_vectors, eliminated, constraints)
        zero = np.flatnonzero(rigid)
        spurious[zero[n_adm:]] = True
        rigid[zero[n_adm:]] = False
    keep = ~spurious
    shapes = vec[:d_idx.size]
    res = ModalResult(
        omega_bar=np.where(rigid, np.where(om < 1e-12, 0.0, om), om)[keep],
        mode_shapes=shapes[:, keep],
        rigid_mode_count=int(rigid.sum()),
        d_index=d_idx,
        spurious_omega_bar=om[spurious],
        energy_ratio=ratio[keep],
    )
    if mode_count is not None:
        mc = int(mode_count)
        res.omega_bar = res.omega_bar[:mc]
        res.mode_shapes = res.mode_shapes[:, :mc]
        res.energy_ratio = res.energy_ratio[:mc]
    return res
