"""Weak-form quadrature elements for the gradient (sixth-order) Euler-Bernoulli beam.

Two single-element formulations share one GLL grid of N nodes:

* ``lagrange`` -- nodal Lagrange interpolation with boundary-augmented
  derivative matrices (SgQE-L);
* ``hermite``  -- C2 Hermite interpolation carrying end slopes and
  curvatures as dofs (SgQE-H).

Dof ordering: w_1..w_N, w'_1, w'_N, w''_1, w''_N.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from ._modal import ModalResult, hourglass_constraints, reduce_and_solve
from .dq_basis import (CURV_L, CURV_R, SLOPE_L, SLOPE_R, hermite_basis,
                       lagrange_derivatives, modify_for_boundary_dofs)
from .gll_quadrature import gll_grid

MIN_NODES = 6
TREATMENTS = ("auto", "strong", "slope", "weak")
# curvature layer counts as resolved when g >= LAYER_RATIO * first node spacing
LAYER_RATIO = 0.25


class BeamBC(str, Enum):
    SS = "ss"
    CLAMPED = "clamped"
    FREE = "free-free"
    CANTILEVER = "cantilever"
    PROPPED = "propped"

    @classmethod
    def parse(cls, name) -> "BeamBC":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "-")
        try:
            return _BC_ALIASES[key]
        except KeyError:
            raise ValueError("unknown beam boundary condition %r" % (name,)) from None


_BC_ALIASES = {
    "ss": BeamBC.SS, "s-s": BeamBC.SS, "simply-supported": BeamBC.SS, "simplysupported": BeamBC.SS,
    "c": BeamBC.CLAMPED, "cc": BeamBC.CLAMPED, "c-c": BeamBC.CLAMPED, "clamped": BeamBC.CLAMPED,
    "ff": BeamBC.FREE, "f-f": BeamBC.FREE, "free": BeamBC.FREE, "free-free": BeamBC.FREE, "freefree": BeamBC.FREE,
    "cf": BeamBC.CANTILEVER, "c-f": BeamBC.CANTILEVER, "cant": BeamBC.CANTILEVER, "cantilever": BeamBC.CANTILEVER,
    "prop": BeamBC.PROPPED, "propped": BeamBC.PROPPED, "propped-cantilever": BeamBC.PROPPED,
    "cs": BeamBC.PROPPED, "c-s": BeamBC.PROPPED, "proppedcantilever": BeamBC.PROPPED,
}


def parse_basis(name) -> str:
    key = str(name).strip().lower()
    if key in ("l", "lagrange", "sgqe-l"):
        return "lagrange"
    if key in ("h", "hermite", "sgqe-h"):
        return "hermite"
    raise ValueError("unknown beam basis %r" % (name,))


@dataclass(frozen=True)
class BeamModel:
    E: float = 3e6
    I: float = 1.0 / 12.0
    A_cs: float = 1.0
    rho: float = 1.0
    L: float = 1.0
    g: float = 0.0

    def __post_init__(self):
        for k in ("E", "I", "A_cs", "rho", "L"):
            if not getattr(self, k) > 0:
                raise ValueError("%s must be positive" % k)
        if not self.g >= 0:
            raise ValueError("g must be non-negative")

    @property
    def EI(self):
        return self.E * self.I

    @property
    def freq_scale(self):
        """sqrt(eigenvalue) -> omega_bar."""
        return self.L ** 2 * np.sqrt(self.rho * self.A_cs / self.EI)


@dataclass
class AssembledSystem:
    K: np.ndarray
    K_cl: np.ndarray
    M_diag: np.ndarray
    labels: list
    n_disp: int
    basis: str
    eliminated: tuple = ()
    b_set: tuple = ()
    d_set: tuple = ()
    constraints: np.ndarray | None = None
    derivs: dict = field(default_factory=dict)
    K_grad: np.ndarray | None = None     # gradient stiffness per unit g^2


    @property
    def K_sg(self):
        return self.K - self.K_cl


def _labels(n):
    return ["w%d" % (i + 1) for i in range(n)] + ["w'1", "w'%d" % n, "w''1", "w''%d" % n]


def _assemble(model, grid, d2, d3, basis, derivs):
    n = grid.n
    h = grid.h
    ei, L = model.EI, model.L
    k_cl = (8.0 * ei / L ** 3) * (d2.T * h) @ d2
    k_gr = (32.0 * ei / L ** 5) * (d3.T * h) @ d3
    k_cl = 0.5 * (k_cl + k_cl.T)
    k_gr = 0.5 * (k_gr + k_gr.T)
    m = model.rho * model.A_cs * L / 2.0 * h
    return AssembledSystem(k_cl + model.g ** 2 * k_gr, k_cl, np.array(m), _labels(n), n, basis, derivs=derivs,
                           K_grad=k_gr)


def assemble_lagrange_beam(model: BeamModel, grid=None, mods=None) -> AssembledSystem:
    """Stiffness from Bbar (curvature) and Cbar (curvature gradient); lumped GLL mass."""
    if grid is None:
        raise ValueError("grid required")
    if grid.n < MIN_NODES:
        raise ValueError("beam element needs N >= %d" % MIN_NODES)
    ds = lagrange_derivatives(grid)
    if mods is None:
        mods = modify_for_boundary_dofs(ds)
    return _assemble(model, grid, mods.Bbar, mods.Cbar, "lagrange", {"A": ds.A, "B": ds.B})


def assemble_hermite_beam(model: BeamModel, grid=None, herm=None) -> AssembledSystem:
    if grid is None:
        raise ValueError("grid required")
    if grid.n < MIN_NODES:
        raise ValueError("beam element needs N >= %d" % MIN_NODES)
    if herm is None:
        herm = hermite_basis(grid)
    ds = lagrange_derivatives(grid)
    return _assemble(model, grid, herm.G2, herm.G3, "hermite", {"A": ds.A, "B": ds.B})


def polynomial_vectors(xi, degree: int):
    """Element dofs of 1, xi, ..., xi^degree (derivatives in xi units)."""
    xi = np.asarray(xi, dtype=float)
    n = xi.size
    out = np.zeros((n + 4, degree + 1))
    for p in range(degree + 1):
        c = np.zeros(p + 1)
        c[p] = 1.0
        d1, d2 = np.polynomial.polynomial.polyder(c), np.polynomial.polynomial.polyder(c, 2)
        pv = np.polynomial.polynomial.polyval
        out[:n, p] = pv(xi, c)
        out[n + SLOPE_L, p], out[n + SLOPE_R, p] = pv(-1.0, d1), pv(1.0, d1)
        out[n + CURV_L, p], out[n + CURV_R, p] = pv(-1.0, d2), pv(1.0, d2)
    return out


def rigid_body_vectors(xi):
    """Translation and rotation in element dofs (slopes in xi units)."""
    return polynomial_vectors(xi, 1)


def essential_dofs(bc: BeamBC, n: int):
    w1, wn = 0, n - 1
    s1, sn, c1, cn = n + SLOPE_L, n + SLOPE_R, n + CURV_L, n + CURV_R
    table = {
        BeamBC.SS: (w1, wn, c1, cn),
        BeamBC.CLAMPED: (w1, wn, s1, sn, c1, cn),
        BeamBC.FREE: (),
        BeamBC.CANTILEVER: (w1, s1, c1),
        BeamBC.PROPPED: (w1, s1, c1, wn, cn),
    }
    return table[bc]


def first_node_spacing(model: BeamModel, n: int) -> float:
    """Physical distance from an end to the first interior GLL node."""
    xi = gll_grid(n).xi
    return 0.5 * model.L * (xi[1] - xi[0])


def resolve_treatment(treatment: str, model: BeamModel, n: int) -> str:
    """Map ``'auto'`` to ``'strong'`` or ``'slope'``.

    A prescribed end curvature of a gradient beam is reached through a
    boundary layer of width ~g. Once g falls well below the first node
    spacing the polynomial field cannot follow it, and imposing w'' = 0 on
    the whole interpolant locks the element (errors of several percent in
    the classical limit). There the curvature condition is left to the
    augmented Cbar rows only.
    """
    if treatment not in TREATMENTS:
        raise ValueError("treatment must be one of %s" % (TREATMENTS,))
    if treatment != "auto":
        return treatment
    return "strong" if model.g >= LAYER_RATIO * first_node_spacing(model, n) else "slope"


def apply_beam_bc(sys: AssembledSystem, bc, treatment: str = "strong", g: float | None = None) -> AssembledSystem:
    """Partition dofs into eliminated / boundary (Delta_b) / displacement (Delta_d).

    Treatments (Lagrange element; the Hermite field carries its end data
    exactly, so only the unresolved-layer rule below applies to it):

    ``'strong'``  eliminated end slopes and curvatures are also imposed on
                  the nodal field: rows A[end] . w = 0 and B[end] . w = 0 are
                  added as constraints on the nodal displacements;
    ``'slope'``   only the slope rows are added; curvature conditions act
                  through the augmented Cbar rows (Hermite: the curvature
                  dofs stay free);
    ``'weak'``    the dofs are deleted and nothing else.

    ``'auto'`` cannot be resolved here (it needs the model); use
    :func:`resolve_treatment` first.

    When g == 0 the curvature conditions disappear from the problem; the
    Lagrange curvature dofs carry no stiffness and are removed.
    """
    bc = BeamBC.parse(bc)
    if treatment not in TREATMENTS[1:]:
        raise ValueError("treatment must be 'strong', 'slope' or 'weak'")
    n = sys.n_disp
    elim = set(essential_dofs(bc, n))
    curv = {n + CURV_L, n + CURV_R}
    # a g^2 term that underflowed to zero leaves the classical problem
    gradient = (g is None or g > 0) and bool(np.any(sys.K != sys.K_cl))
    if not gradient:
        if sys.basis == "lagrange":
            elim |= curv
        else:
            # classical limit: curvature is not prescribed, keep Hermite curvature dofs free
            elim -= curv
    elif sys.basis == "hermite" and treatment == "slope":
        elim -= curv
    rows = []
    if treatment in ("strong", "slope") and sys.basis == "lagrange":
        a, b = sys.derivs["A"], sys.derivs["B"]
        for dof, mat, end in ((n + SLOPE_L, a, 0), (n + SLOPE_R, a, n - 1),
                              (n + CURV_L, b, 0), (n + CURV_R, b, n - 1)):
            if dof not in elim:
                continue
            if dof in curv and (not gradient or treatment == "slope"):
                continue
            r = np.zeros(n + 4)
            r[:n] = mat[end]
            rows.append(r)
    kept = [q for q in range(n + 4) if q not in elim]
    return replace(
        sys,
        eliminated=tuple(sorted(elim)),
        b_set=tuple(q for q in kept if q >= n),
        d_set=tuple(q for q in kept if q < n),
        constraints=np.array(rows) if rows else None,
    )


def hermite_hourglass_rows(sys: AssembledSystem, xi, gradient: bool = True) -> np.ndarray:
    """Hourglass-removal rows for a Hermite system after boundary conditions.

    The N+4 Hermite dofs are seen by the N-point rule through N strain
    samples only; the leftover strain-free patterns would otherwise show up
    as spurious modes sweeping through the spectrum as g changes.
    """
    return hourglass_constraints(sys.K_cl, sys.K_grad, sys.eliminated, sys.constraints,
                                 polynomial_vectors(xi, 1), polynomial_vectors(xi, 2), gradient=gradient)


def beam_frequencies(model: BeamModel, bc, basis="lagrange", n: int = 13, mode_count=None,
                     treatment: str = "auto") -> ModalResult:
    """Natural frequencies omega_bar = omega L^2 sqrt(rho A / EI) of a single-element beam."""
    basis = parse_basis(basis)
    treatment = resolve_treatment(treatment, model, n)
    grid = gll_grid(n)
    if basis == "lagrange":
        sys = assemble_lagrange_beam(model, grid)
    else:
        sys = assemble_hermite_beam(model, grid)
    sys = apply_beam_bc(sys, bc, treatment=treatment, g=model.g)
    cons = sys.constraints
    if basis == "hermite":
        hg = hermite_hourglass_rows(sys, grid.xi, gradient=bool(np.any(sys.K != sys.K_cl)))
        if hg.shape[0]:
            cons = hg if cons is None else np.vstack([cons, hg])
    res = reduce_and_solve(sys.K, sys.K_cl, sys.M_diag, sys.n_disp, sys.eliminated, cons,
                           model.freq_scale, filter_spurious=(basis == "hermite"),
                           rigid_vectors=rigid_body_vectors(grid.xi), energy_filter=False)
    if mode_count is not None:
        if mode_count > res.omega_bar.size:
            raise ValueError("requested %d modes, only %d available" % (mode_count, res.omega_bar.size))
        res.omega_bar = res.omega_bar[:mode_count]
        res.mode_shapes = res.mode_shapes[:, :mode_count]
        res.energy_ratio = res.energy_ratio[:mode_count]
    return res
