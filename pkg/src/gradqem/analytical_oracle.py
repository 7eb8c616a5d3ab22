"""Exact frequencies of the gradient beam (frequency determinant) and SSSS plate (Navier).

The beam solution is a sum of exponentials e^{k x} on 0 <= x <= L where k^2 = z
solves  -g^2 z^3 + z^2 - lam = 0,  lam = omega^2 / beta^2,  beta^2 = EI / (rho A).
Working in omega_bar = omega L^2 sqrt(rho A / EI) gives lam = omega_bar^2 / L^4.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .beam_qem import BeamBC, BeamModel
from .dense_linalg import complex_det


@dataclass(frozen=True)
class CharacteristicRoots:
    omega_bar: float
    lam: float
    z: np.ndarray          # roots in k^2 (3 for g > 0, 2 for g == 0)
    k: np.ndarray          # +/- pairs: k[2i], k[2i+1] = +sqrt(z_i), -sqrt(z_i)
    beta_sq: float = 1.0   # EI / (rho A)

    @property
    def omega(self):
        """Circular frequency for this trial omega_bar."""
        return math.sqrt(self.lam * self.beta_sq)


@dataclass(frozen=True)
class FrequencyMatrix:
    bc: BeamBC
    F: np.ndarray
    col_scale: np.ndarray


def _real_root(g2, lam):
    """One real root of -g2 z^3 + z^2 - lam by monotone Newton.

    Below coalescence (three real roots) the largest one, started from 1/g2;
    otherwise the single (negative) real root, started to its left. Both
    starts sit where f is monotone with constant curvature sign, so the
    iteration cannot overshoot.
    """
    if lam < 4.0 / (27.0 * g2 * g2):
        z = 1.0 / g2
    else:
        z = -max(math.sqrt(lam), (lam / g2) ** (1.0 / 3.0))
    for _ in range(200):
        f = -g2 * z ** 3 + z * z - lam
        df = -3.0 * g2 * z * z + 2.0 * z
        if df == 0.0:
            break
        dz = f / df
        z -= dz
        if abs(dz) <= 4e-16 * abs(z):
            break
    return z


def _cubic_roots(g2, lam):
    """All three roots, deflating the real root with cancellation-free Vieta relations."""
    r = _real_root(g2, lam)
    # z^3 - z^2/g2 + lam/g2 = 0: pairwise sum 0, product -lam/g2
    prod = -lam / (g2 * r)
    if r > 0:
        s = lam / (g2 * r * r)           # = -prod / r, avoids 1/g2 - r
    else:
        s = 1.0 / g2 - r
    disc = cmath.sqrt(s * s - 4.0 * prod)
    q = 0.5 * (s + (disc if s >= 0 else -disc))
    z1 = q
    z2 = prod / q if q != 0 else 0j
    return [_polish(complex(z1), g2, lam), _polish(complex(z2), g2, lam), complex(r)]


def _polish(z, g2, lam, steps=4):
    for _ in range(steps):
        f = -g2 * z ** 3 + z * z - lam
        df = -3.0 * g2 * z * z + 2.0 * z
        if df == 0:
            break
        dz = f / df
        z = z - dz
        if abs(dz) <= 1e-15 * abs(z):
            break
    return z


def characteristic_roots(model: BeamModel, omega_bar: float) -> CharacteristicRoots:
    if not omega_bar > 0:
        raise ValueError("omega must be positive")
    lam = (omega_bar / model.L ** 2) ** 2
    g2 = model.g ** 2
    if not (math.isfinite(lam) and math.isfinite(g2)):
        raise ValueError("non-finite coefficients")
    if g2 == 0.0:
        z = np.array([complex(-math.sqrt(lam)), complex(math.sqrt(lam))])
    else:
        z = np.array(_cubic_roots(g2, lam))
        # imaginary parts below roundoff belong to real roots
        z = np.where(np.abs(z.imag) <= 1e-12 * np.abs(z), z.real + 0j, z)
    z = z[np.lexsort((z.imag, z.real))]
    k = np.empty(2 * z.size, dtype=complex)
    for i, zi in enumerate(z):
        s = cmath.sqrt(zi)
        k[2 * i], k[2 * i + 1] = s, -s
    return CharacteristicRoots(float(omega_bar), lam, z, k, model.EI / (model.rho * model.A_cs))


def coalescence_omega_bar(model: BeamModel) -> float:
    """omega_bar at which two real k^2 roots merge (lam = 4 / (27 g^4)); det vanishes there trivially."""
    if model.g == 0:
        return math.inf
    return model.L ** 2 * math.sqrt(4.0 / (27.0 * model.g ** 4))


def frequency_matrix(model: BeamModel, bc, omega_bar: float, normalize: bool = True) -> FrequencyMatrix:
    """Boundary-condition matrix of the exponential solution, columns max-normalised.

    Columns with Re k > 0 use e^{k (x - L)} instead of e^{k x}; this is a
    nonzero column scaling, so the determinant's zeros are unchanged.
    ``normalize=False`` gives the raw matrix (only safe while |k| L is small).
    """
    bc = BeamBC.parse(bc)
    r = characteristic_roots(model, omega_bar)
    k, L = r.k, model.L
    zz = k * k
    pos = (k.real > 0) if normalize else np.zeros(k.shape, dtype=bool)
    e0 = np.where(pos, np.exp(np.where(pos, -k * L, 0)), 1.0 + 0j)
    eL = np.where(pos, 1.0 + 0j, np.exp(np.where(pos, 0, k * L)))
    if model.g > 0:
        t = k * r.lam / zz          # k^3 - g^2 k^5
        p = r.lam / zz              # k^2 - g^2 k^4
        rows = {
            BeamBC.SS: [e0, eL, zz * e0, zz * eL, zz * zz * e0, zz * zz * eL],
            BeamBC.CLAMPED: [e0, k * e0, zz * e0, eL, k * eL, zz * eL],
            BeamBC.CANTILEVER: [e0, k * e0, zz * e0, t * eL, p * eL, k * zz * eL],
            BeamBC.PROPPED: [e0, k * e0, zz * e0, eL, zz * eL, p * eL],
            BeamBC.FREE: [t * e0, p * e0, k * zz * e0, t * eL, p * eL, k * zz * eL],
        }[bc]
    else:
        rows = {
            BeamBC.SS: [e0, eL, zz * e0, zz * eL],
            BeamBC.CLAMPED: [e0, k * e0, eL, k * eL],
            BeamBC.CANTILEVER: [e0, k * e0, zz * eL, k * zz * eL],
            BeamBC.PROPPED: [e0, k * e0, eL, zz * eL],
            BeamBC.FREE: [zz * e0, k * zz * e0, zz * eL, k * zz * eL],
        }[bc]
    f = np.array(rows, dtype=complex)
    if not normalize:
        return FrequencyMatrix(bc, f, np.ones(f.shape[1]))
    sc = np.abs(f).max(axis=0)
    sc[sc == 0] = 1.0
    return FrequencyMatrix(bc, f / sc, sc)


def det_f(model: BeamModel, bc, omega_bar: float, normalize: bool = True) -> complex:
    m, e = complex_det(frequency_matrix(model, bc, omega_bar, normalize).F)
    return m * 10.0 ** e if e > -300 else 0j


@dataclass
class OracleResult:
    omega_bar: np.ndarray
    complete: bool


def _bisect(fun, a, b, fa, tol=1e-13, maxit=200):
    for _ in range(maxit):
        m = 0.5 * (a + b)
        fm = fun(m)
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
        if b - a <= tol * m:
            break
    return 0.5 * (a + b)


def _golden(fun, a, b, tol=1e-10):
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - gr * (b - a), a + gr * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol * 0.5 * (a + b):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def _scan(model, bc, lo, hi, n_grid, wc, normalize=True):
    det = lambda w: det_f(model, bc, w, normalize)
    om = np.geomspace(lo, hi, n_grid)
    dets = np.array([det(w) for w in om])
    mag = np.abs(dets)
    roots = []
    # region-wise phase reference (the root structure changes at wc)
    for reg in (om < wc, om > wc):
        idx = np.flatnonzero(reg)
        if idx.size < 3:
            continue
        ref = dets[idx[np.argmax(mag[idx])]]
        if ref == 0:
            continue
        ph = ref / abs(ref)
        f = lambda w, ph=ph: (det(w) / ph).real
        for a_i, b_i in zip(idx[:-1], idx[1:]):
            va, vb = (dets[a_i] / ph).real, (dets[b_i] / ph).real
            if va == 0.0:
                roots.append(om[a_i])
            elif (va > 0) != (vb > 0):
                r = _bisect(f, om[a_i], om[b_i], va)
                # accept only genuine zeros, not jumps: |det| must collapse at r
                local = max(mag[a_i], mag[b_i])
                if abs(det(r)) <= 1e-6 * max(local, 1e-300) or local < 1e-3 * mag[idx].max():
                    roots.append(r)
        # deep minima of |det| without a sign change
        for j in range(1, idx.size - 1):
            i0, i1, i2 = idx[j - 1], idx[j], idx[j + 1]
            if mag[i1] < mag[i0] and mag[i1] < mag[i2] and mag[i1] <= 1e-6 * max(mag[i0], mag[i2]):
                roots.append(_golden(lambda w: abs(det(w)), om[i0], om[i2]))
    return roots


def beam_natural_frequencies(model: BeamModel, bc, omega_max: float = 700.0, count: int = 6,
                             n_grid: int = 2000, omega_min: float = 0.2, max_extend: int = 3,
                             normalize: bool = True) -> OracleResult:
    """Roots of det F(omega) above ``omega_min`` (nondimensional), ascending.

    The scan uses a geometric grid; brackets come from sign changes of the
    phase-normalised determinant and from deep local minima of |det|. The
    trivial zero at the root-coalescence frequency is discarded. When fewer
    than ``count`` roots lie below ``omega_max`` the window is extended
    (x4, at most ``max_extend`` times); ``complete`` reports success.
    """
    bc = BeamBC.parse(bc)
    if not omega_max > omega_min > 0:
        raise ValueError("need 0 < omega_min < omega_max")
    wc = coalescence_omega_bar(model)
    lo, hi = omega_min, omega_max
    roots = []
    for _ in range(max_extend + 1):
        roots += _scan(model, bc, lo, hi, max(int(n_grid), 500), wc, normalize)
        out = []
        for r in sorted(roots):
            if math.isfinite(wc) and abs(r - wc) <= 1e-5 * wc:
                continue
            if out and abs(r - out[-1]) <= 1e-7 * r:
                continue
            out.append(r)
        if len(out) >= count:
            break
        lo, hi = hi, 4.0 * hi
    return OracleResult(np.array(out[:count]), len(out) >= count)


def ssss_plate_frequency(model, m: int, n: int) -> float:
    """Navier frequency omega_bar = l_x^2 (a^2 + b^2) sqrt(1 + g^2 (a^2 + b^2)), a = m pi / l_x, b = n pi / l_y."""
    if m < 1 or n < 1:
        raise ValueError("mode numbers start at 1")
    al = m * math.pi / model.lx
    be = n * math.pi / model.ly
    s = al * al + be * be
    return model.lx ** 2 * s * math.sqrt(1.0 + model.g ** 2 * s)


def ssss_plate_spectrum(model, count: int = 6, distinct: bool = True, max_index: int = 12):
    """Ascending Navier frequencies with their (m, n) labels."""
    items = sorted((ssss_plate_frequency(model, m, n), m, n)
                   for m in range(1, max_index + 1) for n in range(1, max_index + 1))
    out = []
    for w, m, n in items:
        if distinct and out and abs(w - out[-1][0]) <= 1e-9 * w:
            continue
        out.append((w, m, n))
    return out[:count]
