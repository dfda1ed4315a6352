"""The bilinear form ``L(xi1, xi2) = int_D d<tau (dbar Pi) xi1, xi2> dmu``.

``xi1 = (I - Pi) h1`` with ``h1`` analytic and ``xi2 = Pi conj(p2)``. Expanding
the derivative gives three parts:

    I   = int tau <Delta Pi xi1, xi2>
    II  = int tau <dbarPi dxi1, xi2> + (tau'/2) <dbarPi xi1, xi2>
    III = int tau <dbarPi xi1, dbar xi2> + (tau'/2) <dbarPi xi1, xi2>

with ``Delta Pi = dPi dbarPi - dbarPi dPi``. ``I`` vanishes pointwise because
``dPi xi1 = 0`` and ``dbarPi xi2 = 0``. The form also equals the boundary
expression ``int_T tau <h1, xi2> dm - tau(0) <h1(0), xi2(0)>``, which serves as
an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .disk_core import as_field, as_scalar_poly, integrate_values
from .embedding import Workspace, inner, matvec, section_values, size_condition, sqnorm

EXCLUDED_BUDGET = 0.01
RANK_TOL = 1e-10


class ExcludedBudgetError(ValueError):
    pass


@dataclass(frozen=True)
class FormEvaluation:
    value: complex
    I: complex
    II: complex
    III: complex
    boundary_value: complex
    energy1: float
    energy2: float
    bound_ratio: float
    max_annihilation: float
    excluded_nodes: int = 0
    excluded_weight: float = 0.0
    size_ok: bool | None = None

    @property
    def decomposition_residual(self):
        return abs(self.value - (self.I + self.II + self.III))

    @property
    def oracle_residual(self):
        return abs(self.boundary_value - (self.I + self.II + self.III))

    def to_dict(self):
        c = lambda v: [float(np.real(v)), float(np.imag(v))]
        d = {
            "L_value": c(self.value),
            "parts": {"I": c(self.I), "II": c(self.II), "III": c(self.III)},
            "boundary_value": c(self.boundary_value),
            "energies": [self.energy1, self.energy2],
            "bound_ratio": self.bound_ratio,
            "max_annihilation": self.max_annihilation,
            "excluded_nodes": self.excluded_nodes,
            "excluded_weight": self.excluded_weight,
        }
        if self.size_ok is not None:
            d["size_ok"] = self.size_ok
        return d


def _disk_sum(values, mask, rule):
    return complex(integrate_values(np.where(mask, values, 0.0), rule))


def eval_form(f, tau, h1, p2, ws=None, psi=None, budget=EXCLUDED_BUDGET):
    """Quadrature value of the form and its three parts.

    ``psi`` is optional; when given, the size condition is evaluated and
    recorded in ``size_ok`` but never enforced here.
    """
    ws = ws if ws is not None else Workspace.build(f)
    tau = as_scalar_poly(tau)
    h1, p2 = as_field(h1), as_field(p2)
    geo, bg = ws.disk, ws.bdry
    ok = geo.valid
    nx = int((~ok).sum())
    wx = float(np.sum(ws.q.weights[~ok]))
    if wx > budget * float(np.sum(ws.q.weights)):
        raise ExcludedBudgetError(f"excluded nodes carry {wx:.3e} of the disk weight (budget {budget:.0%})")

    t = tau.derivatives(geo.nodes, 1)
    s1, ds1, _ = section_values(geo, "zeta", h1)
    s2, _, dbs2 = section_values(geo, "xi", p2)
    D = geo.dPi
    Db = np.conj(np.swapaxes(D, -1, -2))
    a1 = matvec(Db, s1)
    base = inner(a1, s2)
    part_I = t[0] * (inner(a1, matvec(Db, s2)) - inner(matvec(D, s1), matvec(D, s2)))
    part_II = t[0] * inner(matvec(Db, ds1), s2) + 0.5 * t[1] * base
    part_III = t[0] * inner(a1, dbs2) + 0.5 * t[1] * base
    lap_pi = D @ Db - Db @ D
    direct = (t[1] * base + t[0] * inner(matvec(lap_pi, s1), s2)
              + t[0] * inner(matvec(Db, ds1), s2) + t[0] * inner(a1, dbs2))

    annihilation = max(np.abs(matvec(D, s1))[ok].max(initial=0.0),
                       np.abs(matvec(Db, s2))[ok].max(initial=0.0))
    value = _disk_sum(direct, ok, ws.q)
    I, II, III = (_disk_sum(v, ok, ws.q) for v in (part_I, part_II, part_III))

    bval = boundary_value(ws, tau, h1, p2)
    sb1, _, _ = section_values(bg, "zeta", h1)
    sb2, _, _ = section_values(bg, "xi", p2)
    e1 = math.sqrt(max(float(np.real(integrate_values(sqnorm(sb1), ws.b))), 0.0))
    e2 = math.sqrt(max(float(np.real(integrate_values(sqnorm(sb2), ws.b))), 0.0))
    ratio = abs(value) / (e1 * e2) if e1 * e2 > 0 else 0.0
    size_ok = None
    if psi is not None:
        size_ok = size_condition(ws.f, tau, psi, ws.q.nodes).passed
    return FormEvaluation(value, I, II, III, bval, e1, e2, ratio, float(annihilation),
                          nx, wx, size_ok)


def boundary_value(ws, tau, h1, p2):
    """Green's-formula value ``int_T tau <h1, xi2> dm - tau(0) <h1(0), xi2(0)>``."""
    tau, h1, p2 = as_scalar_poly(tau), as_field(h1), as_field(p2)
    bg = ws.bdry
    sb2, _, _ = section_values(bg, "xi", p2)
    vals = tau(bg.nodes) * inner(h1(bg.nodes), sb2)
    edge = complex(integrate_values(vals, ws.b))
    z0 = np.zeros(1, dtype=complex)
    f0 = ws.f(z0)[0]
    n0 = float(np.vdot(f0, f0).real)
    xi0 = f0 * (np.vdot(f0, np.conj(p2(z0)[0])) / n0)
    center = complex(tau(z0)[0]) * complex(np.vdot(xi0, h1(z0)[0]))
    return edge - center


@dataclass(frozen=True)
class SymmetryCheck:
    shifted_first: complex
    shifted_second: complex

    @property
    def residual(self):
        return abs(self.shifted_first - self.shifted_second)


def hankel_symmetry_check(f, tau, h1, p2, ws=None):
    """``|L(z xi1, xi2) - L(xi1, conj(z) xi2)|`` with the constant term of ``p2`` dropped."""
    ws = ws if ws is not None else Workspace.build(f)
    h1, p2 = as_field(h1), as_field(p2).drop_constant()
    a = eval_form(ws.f, tau, h1.times_z(), p2, ws=ws).value
    b = eval_form(ws.f, tau, h1, p2.times_z(), ws=ws).value
    return SymmetryCheck(a, b)


@dataclass(frozen=True)
class FormNormEstimate:
    degree: int
    value: float
    rank1: int
    rank2: int
    form_matrix: np.ndarray = field(repr=False)
    gram1: np.ndarray = field(repr=False)
    gram2: np.ndarray = field(repr=False)

    def to_dict(self):
        return {"D": self.degree, "value": self.value, "rank1": self.rank1, "rank2": self.rank2}


def _inv_sqrt(G, tol=RANK_TOL):
    G = 0.5 * (G + G.conj().T)
    w, V = np.linalg.eigh(G)
    top = float(w.max()) if w.size else 0.0
    keep = w > tol * top if top > 0 else np.zeros_like(w, dtype=bool)
    inv = np.where(keep, 1.0 / np.sqrt(np.where(keep, w, 1.0)), 0.0)
    return (V * inv) @ V.conj().T, int(keep.sum())


def form_matrices(ws, tau, degree):
    """Form matrix and boundary Gram matrices over monomial bases.

    First family: ``h1 = e_k z^a`` for ``a = 0..degree``; second family:
    ``p2 = e_l z^b`` for ``b = 1..degree``. Row/column index is ``k*(deg+1)+a``
    and ``l*degree+(b-1)``. Entries use the boundary expression of the form,
    which reduces to Fourier moments of ``tau z^(a+b) Pi_{lk}``.
    """
    tau = as_scalar_poly(tau)
    bg = ws.bdry
    z = bg.nodes
    Pi = bg.Pi
    Q = np.eye(Pi.shape[-1]) - Pi
    a = np.arange(degree + 1)
    b = np.arange(1, degree + 1)
    za = z[:, None] ** a[None, :]
    zb = z[:, None] ** b[None, :]
    tz = tau(z)
    # A[(k,a),(l,b)] = int tau z^(a+b) Pi[l,k]
    A_vals = (tz[:, None, None, None, None] * za[:, None, :, None, None] * zb[:, None, None, None, :]
              * np.swapaxes(Pi, 1, 2)[:, :, None, :, None])
    # G1[(k',a'),(k,a)] = int z^a conj(z^a') Q[k',k]
    G1_vals = Q[:, :, None, :, None] * np.conj(za)[:, None, :, None, None] * za[:, None, None, None, :]
    # G2[(l',b'),(l,b)] = int conj(z^b) z^b' Pi[l',l]
    G2_vals = Pi[:, :, None, :, None] * zb[:, None, :, None, None] * np.conj(zb)[:, None, None, None, :]
    n = Pi.shape[-1]
    m1, m2 = n * (degree + 1), n * degree
    A = integrate_values(A_vals.reshape(len(z), m1, m2), ws.b)
    G1 = integrate_values(G1_vals.reshape(len(z), m1, m1), ws.b)
    G2 = integrate_values(G2_vals.reshape(len(z), m2, m2), ws.b)
    return np.asarray(A), np.asarray(G1), np.asarray(G2)


def estimate_form_norm(f, tau, degree, ws=None, rank_tol=RANK_TOL):
    """Largest ``|L(xi1, xi2)| / (|xi1|_2 |xi2|_2)`` over the truncated bases.

    A lower bound for the norm of the form, nondecreasing in ``degree``.
    """
    if not 1 <= int(degree) <= 12:
        raise ValueError("degree must lie in 1..12")
    ws = ws if ws is not None else Workspace.build(f)
    A, G1, G2 = form_matrices(ws, tau, int(degree))
    S1, r1 = _inv_sqrt(G1, rank_tol)
    S2, r2 = _inv_sqrt(G2, rank_tol)
    K = S1 @ np.conj(A) @ S2
    val = float(np.linalg.svd(K, compute_uv=False)[0]) if K.size else 0.0
    return FormNormEstimate(int(degree), val, r1, r2, A, G1, G2)


def form_from_coefficients(est, a, c):
    """``L`` for ``h1 = sum a_i e_i`` and ``p2 = sum c_j eps_j`` with norms, from the matrices."""
    a, c = np.asarray(a), np.asarray(c)
    val = complex(a @ est.form_matrix @ c)
    n1 = math.sqrt(max(float(np.real(np.conj(a) @ est.gram1 @ a)), 0.0))
    d = np.conj(c)
    n2 = math.sqrt(max(float(np.real(np.conj(d) @ est.gram2 @ d)), 0.0))
    return val, n1, n2


def basis_polynomials(n, degree):
    """Monomial bases matching :func:`form_matrices` as coefficient tables."""
    first, second = [], []
    for k in range(n):
        for a in range(degree + 1):
            c = np.zeros((n, degree + 1), dtype=complex)
            c[k, a] = 1
            first.append(c)
    for l in range(n):
        for b in range(1, degree + 1):
            c = np.zeros((n, degree + 1), dtype=complex)
            c[l, b] = 1
            second.append(c)
    return first, second
