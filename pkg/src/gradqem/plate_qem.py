"""Single-element weak-form quadrature plates with strain-gradient stiffness.

Two bases on an N x N GLL grid:

* ``LL`` -- Lagrange in both directions, boundary-augmented operators;
* ``LH`` -- Lagrange in xi (x) and C2 Hermite in eta (y).

Global dof layout (N^2 + 8N):
    w_ij at i*N + j  (i along x, j along y)
    normal slopes    N^2 + e*N + k        e = 0 left (w_x), 1 right, 2 bottom (w_y), 3 top
    normal curvature N^2 + 4N + e*N + k   same edge order

Strain operators act on the whole dof vector and return values at all grid
points (row i*N + j), so stiffness assembly is a handful of weighted Gram
products.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from ._modal import ModalResult, reduce_and_solve
from .dq_basis import (CURV_L, CURV_R, SLOPE_L, SLOPE_R, hermite_basis,
                       lagrange_derivatives, modify_for_boundary_dofs)
from .gll_quadrature import gll_grid

MIN_NODES = 6
LEFT, RIGHT, BOTTOM, TOP = 0, 1, 2, 3
_EDGE_NAMES = ("left", "right", "bottom", "top")


class PlateBC(str, Enum):
    SSSS = "SSSS"
    FFFF = "FFFF"
    SSFF = "SSFF"

    @classmethod
    def parse(cls, name) -> "PlateBC":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().upper())
        except ValueError:
            raise ValueError("unknown plate boundary condition %r" % (name,)) from None


def parse_basis(name) -> str:
    key = str(name).strip().upper().replace("SGQE-", "")
    if key not in ("LL", "LH"):
        raise ValueError("unknown plate basis %r" % (name,))
    return key


@dataclass(frozen=True)
class PlateModel:
    E: float = 1.0
    nu: float = 0.3
    h: float = 0.01
    rho: float = 1.0
    lx: float = 1.0
    ly: float = 1.0
    g: float = 0.0

    def __post_init__(self):
        for k in ("E", "h", "rho", "lx", "ly"):
            if not getattr(self, k) > 0:
                raise ValueError("%s must be positive" % k)
        if not 0.0 <= self.nu < 0.5:
            raise ValueError("Poisson ratio must lie in [0, 0.5)")
        if not self.g >= 0:
            raise ValueError("g must be non-negative")

    @property
    def D(self):
        return self.E * self.h ** 3 / (12.0 * (1.0 - self.nu ** 2))

    @property
    def freq_scale(self):
        return self.lx ** 2 * np.sqrt(self.rho * self.h / self.D)


def constitutive_matrices(nu: float):
    """(D_cl, D_sg) for strain orders (w_xx, w_yy, w_xy) and (w_xxx, w_yyy, w_xxy, w_xyy)."""
    d_cl = np.array([[1.0, nu, 0.0], [nu, 1.0, 0.0], [0.0, 0.0, 2.0 * (1.0 - nu)]])
    d_sg = np.diag([1.0, 1.0, 3.0 - 2.0 * nu, 3.0 - 2.0 * nu])
    d_sg[0, 3] = d_sg[3, 0] = nu
    d_sg[1, 2] = d_sg[2, 1] = nu
    return d_cl, d_sg


@dataclass(frozen=True)
class PlateDofMap:
    N: int

    @property
    def n_disp(self):
        return self.N * self.N

    @property
    def total(self):
        return self.N * self.N + 8 * self.N

    def w(self, i, j):
        return i * self.N + j

    def slope(self, edge, k):
        return self.N * self.N + edge * self.N + k

    def curv(self, edge, k):
        return self.N * self.N + 4 * self.N + edge * self.N + k

    def edge_w(self, edge):
        n = self.N
        r = np.arange(n)
        return {LEFT: r, RIGHT: (n - 1) * n + r, BOTTOM: r * n, TOP: r * n + n - 1}[edge]

    def label(self, q):
        n = self.N
        if not 0 <= q < self.total:
            raise IndexError(q)
        if q < n * n:
            return ("w", divmod(q, n))
        q -= n * n
        kind = "slope" if q < 4 * n else "curv"
        e, k = divmod(q % (4 * n), n)
        return (kind, (_EDGE_NAMES[e], k))

    def index(self, label):
        kind, pos = label
        if kind == "w":
            return self.w(*pos)
        e = _EDGE_NAMES.index(pos[0])
        return self.slope(e, pos[1]) if kind == "slope" else self.curv(e, pos[1])


def build_dof_map(n: int) -> PlateDofMap:
    if int(n) != n or n < 4:
        raise ValueError("plate dof map needs N >= 4")
    return PlateDofMap(int(n))


# -- tensor-product operators ------------------------------------------------

def _edge_cols(dm, aug_col, along_x):
    """Global column block (N dofs) addressed by an augmented column of a 1-D operator."""
    base = {SLOPE_L: dm.slope, SLOPE_R: dm.slope, CURV_L: dm.curv, CURV_R: dm.curv}[aug_col]
    side = aug_col in (SLOPE_R, CURV_R)
    edge = (RIGHT if side else LEFT) if along_x else (TOP if side else BOTTOM)
    return base(edge, 0) + np.arange(dm.N)


def _op(dm, X, Y, Y_edge=None):
    """Operator for d^p/dxi^p d^q/deta^q given 1-D matrices X (xi) and Y (eta).

    X, Y are N x N (plain) or N x (N+4) (augmented). A xi-augmented column
    addresses the x-edge dof of the same grid row; an eta-augmented column
    the y-edge dof of the same grid column. Terms with both factors
    augmented (corner products of edge dofs) are dropped. ``Y_edge``
    optionally replaces the plain eta factor applied to x-edge dofs.
    """
    n = dm.N
    out = np.zeros((n * n, dm.total))
    Xn, Yn = X[:, :n], Y[:, :n]
    out[:, :n * n] = np.kron(Xn, Yn)
    for c in range(X.shape[1] - n):
        col = X[:, n + c:n + c + 1]
        if np.any(col):
            out[:, _edge_cols(dm, c, True)] += np.kron(col, Yn if Y_edge is None else Y_edge)
    for c in range(Y.shape[1] - n):
        col = Y[:, n + c:n + c + 1]
        if np.any(col):
            out[:, _edge_cols(dm, c, False)] += np.kron(Xn, col)
    return out


@dataclass
class StrainOperators:
    """Classical (3) and gradient (4) strain operators, each (N^2, dofs)."""
    cl: list
    sg: list

    def rows_at(self, dm: PlateDofMap, i: int, j: int):
        r = dm.w(i, j)
        return (np.array([f[r] for f in self.cl]), np.array([f[r] for f in self.sg]))


def strain_operators(mods_x, eta_ops, dm: PlateDofMap, lx: float, ly: float,
                     edge_d1=None) -> StrainOperators:
    """Physical strain operators.

    ``eta_ops`` is (first, second, third) derivative matrices in eta: the
    augmented Lagrange set (LL) or the Hermite G1..G3 (LH).
    """
    n = dm.N
    a, b = lx, ly
    eye = np.eye(n)
    ax, bx, cx = mods_x.Abar, mods_x.Bbar, mods_x.Cbar
    e1, e2, e3 = eta_ops
    cl = [
        4.0 / a ** 2 * _op(dm, bx, eye),
        4.0 / b ** 2 * _op(dm, eye, e2),
        4.0 / (a * b) * _op(dm, ax, e1),
    ]
    sg = [
        8.0 / a ** 3 * _op(dm, cx, eye),
        8.0 / b ** 3 * _op(dm, eye, e3),
        8.0 / (a * a * b) * _op(dm, bx, e1, edge_d1),
        8.0 / (a * b * b) * _op(dm, ax, e2),
    ]
    return StrainOperators(cl, sg)


def _basis_ops(n, basis):
    grid = gll_grid(n)
    ds = lagrange_derivatives(grid)
    mods = modify_for_boundary_dofs(ds)
    if basis == "LL":
        eta = (mods.Abar, mods.Bbar, mods.Cbar)
    else:
        hb = hermite_basis(grid)
        eta = (hb.G1, hb.G2, hb.G3)
    return grid, ds, mods, eta


def strain_rows_ll(mods_x, mods_y, dm: PlateDofMap, i: int, j: int, lx=1.0, ly=1.0):
    ops = strain_operators(mods_x, (mods_y.Abar, mods_y.Bbar, mods_y.Cbar), dm, lx, ly)
    return ops.rows_at(dm, i, j)


def strain_rows_lh(mods_x, herm_y, dm: PlateDofMap, i: int, j: int, lx=1.0, ly=1.0,
                   lh_edge: str = "lagrange"):
    # same-grid Lagrange A is the nodal block of Abar
    edge = mods_x.Abar[:, :dm.N] if lh_edge == "lagrange" else None
    ops = strain_operators(mods_x, (herm_y.G1, herm_y.G2, herm_y.G3), dm, lx, ly, edge_d1=edge)
    return ops.rows_at(dm, i, j)


@dataclass
class PlateSystem:
    K: np.ndarray
    K_cl: np.ndarray
    M_diag: np.ndarray
    dof_map: PlateDofMap
    basis: str
    xi: np.ndarray
    derivs: dict = field(default_factory=dict)
    eliminated: tuple = ()
    b_set: tuple = ()
    d_set: tuple = ()
    constraints: np.ndarray | None = None

    @property
    def n_disp(self):
        return self.dof_map.n_disp

    @property
    def K_sg(self):
        return self.K - self.K_cl


def _gram(ops, dmat, wts):
    n = len(ops)
    k = np.zeros((ops[0].shape[1],) * 2)
    for p in range(n):
        wp = ops[p] * wts[:, None]
        for q in range(n):
            if dmat[p, q] != 0.0:
                k += dmat[p, q] * (wp.T @ ops[q])
    return 0.5 * (k + k.T)


def assemble_plate(model: PlateModel, basis="LL", n: int = 11, lh_edge: str = "lagrange") -> PlateSystem:
    """Stiffness (classical part kept separately) and lumped mass.

    ``lh_edge`` (LH only) chooses how the eta-derivative of x-edge slope data
    is taken in w_xxy: ``'lagrange'`` differentiates the nodal edge values
    with the Lagrange matrix; ``'hermite'`` reuses the nodal Hermite
    functions, which implicitly zero the corner cross-derivatives.
    """
    basis = parse_basis(basis)
    if lh_edge not in ("lagrange", "hermite"):
        raise ValueError("lh_edge must be 'lagrange' or 'hermite'")
    if int(n) != n or n < MIN_NODES:
        raise ValueError("plate element needs N >= %d" % MIN_NODES)
    dm = build_dof_map(n)
    grid, ds, mods, eta = _basis_ops(n, basis)
    edge = ds.A if (basis == "LH" and lh_edge == "lagrange") else None
    ops = strain_operators(mods, eta, dm, model.lx, model.ly, edge_d1=edge)
    wts = np.kron(grid.h, grid.h) * model.lx * model.ly / 4.0
    d_cl, d_sg = constitutive_matrices(model.nu)
    k_cl = model.D * _gram(ops.cl, d_cl, wts)
    k = k_cl + model.g ** 2 * model.D * _gram(ops.sg, d_sg, wts)
    m = model.rho * model.h * wts
    return PlateSystem(k, k_cl, m, dm, basis, np.asarray(grid.xi), derivs={"A": ds.A, "B": ds.B})


def rigid_body_vectors(dm: PlateDofMap, xi):
    """w = 1, w = xi, w = eta in element dofs (slopes in reference units)."""
    n = dm.N
    r = np.zeros((dm.total, 3))
    r[:n * n, 0] = 1.0
    r[:n * n, 1] = np.repeat(xi, n)
    r[:n * n, 2] = np.tile(xi, n)
    for e in (LEFT, RIGHT):
        r[dm.slope(e, 0):dm.slope(e, 0) + n, 1] = 1.0
    for e in (BOTTOM, TOP):
        r[dm.slope(e, 0):dm.slope(e, 0) + n, 2] = 1.0
    return r


# supported edges per condition: (edges with w = 0 and prescribed normal curvature)
_SS_EDGES = {PlateBC.SSSS: (LEFT, RIGHT, BOTTOM, TOP), PlateBC.FFFF: (), PlateBC.SSFF: (BOTTOM, RIGHT)}


def essential_dofs(bc: PlateBC, dm: PlateDofMap):
    """Eliminated dofs: edge deflection and normal curvature on supported edges,
    plus the normal slopes at corners touching a supported edge pair."""
    n = dm.N
    elim = set()
    edges = _SS_EDGES[bc]
    for e in edges:
        elim |= set(int(q) for q in dm.edge_w(e))
        elim |= {dm.curv(e, k) for k in range(n)}
    if bc == PlateBC.SSSS:
        elim |= {dm.slope(e, k) for e in range(4) for k in (0, n - 1)}
    elif bc == PlateBC.SSFF:
        # slopes along a supported edge vanish at its ends
        elim |= {dm.slope(RIGHT, 0), dm.slope(BOTTOM, n - 1), dm.slope(LEFT, 0), dm.slope(TOP, n - 1)}
    return elim


def apply_plate_bc(sys: PlateSystem, bc, treatment: str = "auto", g: float | None = None) -> PlateSystem:
    """Partition dofs; with ``treatment='strong'`` supported edges in a Lagrange
    direction also get the nodal field's normal curvature set to zero.

    With g == 0 the curvature dofs of Lagrange directions are removed and
    Hermite curvature dofs are left free (no curvature condition exists).
    """
    bc = PlateBC.parse(bc)
    if treatment == "auto":
        # simply supported edges carry no curvature boundary layer
        treatment = "strong"
    if treatment not in ("strong", "weak"):
        raise ValueError("plate treatment must be 'auto', 'strong' or 'weak'")
    dm = sys.dof_map
    n = dm.N
    elim = essential_dofs(bc, dm)
    # a g^2 term that underflowed to zero leaves the classical problem
    gradient = (g is None or g > 0) and bool(np.any(sys.K != sys.K_cl))
    lag_edges = (LEFT, RIGHT) if sys.basis == "LH" else (LEFT, RIGHT, BOTTOM, TOP)
    if not gradient:
        for e in range(4):
            cv = {dm.curv(e, k) for k in range(n)}
            elim = (elim | cv) if e in lag_edges else (elim - cv)
    rows = []
    if treatment == "strong" and gradient:
        bmat = sys.derivs["B"]
        for e in _SS_EDGES[bc]:
            if e not in lag_edges:
                continue
            end = 0 if e in (LEFT, BOTTOM) else n - 1
            for k in range(n):
                r = np.zeros(dm.total)
                if e in (LEFT, RIGHT):
                    r[[dm.w(l, k) for l in range(n)]] = bmat[end]
                else:
                    r[[dm.w(k, l) for l in range(n)]] = bmat[end]
                free = [q for q in np.flatnonzero(r) if q not in elim]
                if free:
                    rows.append(r)
    kept = [q for q in range(dm.total) if q not in elim]
    return replace(
        sys,
        eliminated=tuple(sorted(elim)),
        b_set=tuple(q for q in kept if q >= dm.n_disp),
        d_set=tuple(q for q in kept if q < dm.n_disp),
        constraints=np.array(rows) if rows else None,
    )


def plate_frequencies(model: PlateModel, bc, basis="LL", n: int = 11, mode_count=None,
                      treatment: str = "auto", lh_edge: str = "lagrange") -> ModalResult:
    """omega_bar = omega lx^2 sqrt(rho h / D) for the single-element plate."""
    basis = parse_basis(basis)
    sys = assemble_plate(model, basis, n, lh_edge=lh_edge)
    sys = apply_plate_bc(sys, bc, treatment=treatment, g=model.g)
    res = reduce_and_solve(sys.K, sys.K_cl, sys.M_diag, sys.n_disp, sys.eliminated, sys.constraints,
                           model.freq_scale, filter_spurious=(basis == "LH"),
                           rigid_vectors=rigid_body_vectors(sys.dof_map, sys.xi))
    if mode_count is not None:
        if mode_count > res.omega_bar.size:
            raise ValueError("requested %d modes, only %d available" % (mode_count, res.omega_bar.size))
        res.omega_bar = res.omega_bar[:mode_count]
        res.mode_shapes = res.mode_shapes[:, :mode_count]
        res.energy_ratio = res.energy_ratio[:mode_count]
    return res


def distinct_frequencies(omega, count=None, rtol=2e-4, skip_rigid=True):
    """Collapse repeated (degenerate) frequencies, ascending."""
    out = []
    for w in np.sort(np.asarray(omega, dtype=float)):
        if skip_rigid and w < 1e-3:
            continue
        if out and abs(w - out[-1]) <= rtol * w:
            continue
        out.append(w)
    out = np.array(out)
    return out if count is None else out[:count]
