"""Carleson-type embedding checks for the projection bundle of ``f``.

Two section families are used throughout, both built from a vector polynomial ``p``:

* ``xi``:   ``xi = Pi h`` with ``h = conj(p)`` (anti-analytic ``h``)
* ``zeta``: ``zeta = (I - Pi) p``

Each check returns an :class:`EmbeddingReport` with the quadrature value of the
left side, the boundary energy on the right, and the margin ``rhs - lhs``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .correcting import build_correcting_factor, eval_M, phi
from .disk_core import (
    as_field, as_scalar_poly, build_boundary_quadrature, build_disk_quadrature,
    integrate_values,
)
from .projection import FIBER_EPS, VanishingFiberError, node_geometry

EPS_TAU = 1e-12
U_FLOOR = -700.0
SIZE_TOL = 1e-10
GATE_BOUNDARY = 4096


class SizeConditionError(ValueError):
    def __init__(self, margin, z):
        super().__init__(f"size condition fails: margin {margin:.3e} at z = {complex(z)!r}")
        self.margin = margin
        self.z = complex(z)


class NotSubunitaryError(ValueError):
    pass


def inner(a, b):
    """``<a, b> = b^* a`` along the last axis."""
    return np.sum(a * np.conj(b), axis=-1)


def sqnorm(a):
    return np.sum(a.real**2 + a.imag**2, axis=-1)


def matvec(A, v):
    return np.einsum("nij,nj->ni", A, v)


@dataclass(frozen=True)
class Workspace:
    """Geometry of ``f`` cached at the disk and boundary nodes of a quadrature pair."""

    f: object
    q: object = field(repr=False)
    b: object = field(repr=False)
    disk: object = field(repr=False)
    bdry: object = field(repr=False)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def build(cls, f, q=None, b=None, eps=FIBER_EPS):
        f = as_field(f)
        q = q if q is not None else build_disk_quadrature()
        b = b if b is not None else build_boundary_quadrature()
        return cls(f, q, b, node_geometry(f, q.nodes, eps), node_geometry(f, b.nodes, eps))

    @property
    def quadrature(self):
        return {"N_r": self.q.n_radial, "N_theta": self.q.n_angular, "N_b": self.b.n_boundary}

    def sections(self, kind, p):
        """Cached ``(disk (s, ds, dbar s), boundary s)`` for a section."""
        p = as_field(p)
        key = ("section", kind, p.coeffs.shape, p.coeffs.tobytes())
        if key not in self._cache:
            self._cache[key] = (section_values(self.disk, kind, p), section_values(self.bdry, kind, p)[0])
        return self._cache[key]

    def log_norms(self):
        """``u = log |f|^2`` at disk and boundary nodes, checked and clamped."""
        if "u" not in self._cache:
            self._cache["u"] = (_checked_u(self.disk.norm2, self.disk.valid),
                                _checked_u(self.bdry.norm2, self.bdry.valid))
        return self._cache["u"]

    def factor_values(self, M):
        """Cached ``(M'(u) on disk nodes, M(u) on boundary nodes)``."""
        key = ("factor", id(M))
        hit = self._cache.get(key)
        if hit is None or hit[0] is not M:
            ud, ub = self.log_norms()
            hit = (M, eval_M(M, ud, 1), eval_M(M, ub, 0))
            self._cache[key] = hit
        return hit[1], hit[2]


def section_values(geom, kind, p):
    """``(s, ds, dbar s)`` of a section at every node of ``geom``; shapes (N, n)."""
    p = as_field(p)
    if p.dim != geom.f.shape[1]:
        raise ValueError(f"section has dimension {p.dim}, field has {geom.f.shape[1]}")
    vals = p.derivatives(geom.nodes, 1)
    P, dP = vals[0], vals[1]
    Pi, D = geom.Pi, geom.dPi
    Db = np.conj(np.swapaxes(D, -1, -2))
    if kind == "xi":
        h = np.conj(P)
        s = matvec(Pi, h)
        ds = matvec(D, s)
        dbs = matvec(Db, h) + matvec(Pi, np.conj(dP))
    elif kind == "zeta":
        s = P - matvec(Pi, P)
        ds = -matvec(D, P) + dP - matvec(Pi, dP)
        dbs = -matvec(Db, P)
    else:
        raise ValueError(f"unknown section kind {kind!r}")
    return s, ds, dbs


@dataclass(frozen=True)
class SectionField:
    """A section of kind ``xi`` or ``zeta`` generated by the polynomial ``p``."""

    f: object
    kind: str
    p: object

    def __post_init__(self):
        if self.kind not in ("xi", "zeta"):
            raise ValueError(f"unknown section kind {self.kind!r}")
        object.__setattr__(self, "f", as_field(self.f))
        object.__setattr__(self, "p", as_field(self.p))

    def on(self, geom):
        return section_values(geom, self.kind, self.p)

    def at(self, z, eps=FIBER_EPS):
        return section_derivatives(self.f, self.kind, self.p, z, eps)


def section_derivatives(f, kind, p, z, eps=FIBER_EPS):
    """``(s, ds, dbar s)`` at a single point; raises on a vanishing fiber."""
    geom = node_geometry(f, np.array([complex(z)]), eps=0.0)
    norm = math.sqrt(float(geom.norm2[0]))
    if norm < eps:
        raise VanishingFiberError(z, norm)
    s, ds, dbs = section_values(geom, kind, p)
    return s[0], ds[0], dbs[0]


@dataclass(frozen=True)
class EmbeddingReport:
    inequality_id: str
    lhs: float
    rhs: float
    mid: float | None = None
    excluded_nodes: int = 0
    excluded_weight: float = 0.0
    quadrature: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    @property
    def margin(self):
        return self.rhs - self.lhs

    @property
    def chain_ok(self):
        return self.mid is None or self.mid <= self.rhs + 1e-12

    def passed(self, tol=1e-8):
        return self.margin >= -tol and (self.mid is None or self.lhs <= self.mid + tol)

    def to_dict(self):
        d = {
            "inequality_id": self.inequality_id,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "excluded_nodes": self.excluded_nodes,
            "excluded_weight": self.excluded_weight,
            "quadrature": dict(self.quadrature),
        }
        if self.mid is not None:
            d["mid"] = self.mid
        d.update(self.extras)
        return d


def _integrate(values, mask, rule):
    v = np.where(mask, values, 0.0)
    return float(np.real(integrate_values(v, rule)))


def _checked_u(norm2, valid, tol=1e-10):
    with np.errstate(divide="ignore"):
        u = np.log(np.where(valid, norm2, 1.0))
    if np.any(u[valid] > tol):
        raise NotSubunitaryError(f"log|f|^2 reaches {float(u[valid].max()):.3e} > 0; f is not sup-normalized")
    return np.clip(u, U_FLOOR, 0.0)


def _excluded(valid, rule):
    return int((~valid).sum()), float(np.sum(rule.weights[~valid]))


def subharmonic_weight_check(u, lap_u, M, h, q=None, b=None, inequality_id="subharmonic_weight"):
    """Weighted embedding for a subharmonic ``u <= 0`` with its normalized Laplacian.

    ``u`` and ``lap_u`` are vectorized callables on nodes; ``h`` is a vector
    polynomial, a callable returning ``(N, n)`` values, or a scalar callable.
    Nodes where ``u`` is not finite are excluded and counted.
    """
    q = q if q is not None else build_disk_quadrature()
    b = b if b is not None else build_boundary_quadrature()

    def energy(nodes):
        v = np.asarray(h(nodes) if callable(h) else as_field(h)(nodes))
        return sqnorm(v) if v.ndim == 2 else np.abs(v) ** 2

    ud, lap = np.asarray(u(q.nodes), dtype=float), np.asarray(lap_u(q.nodes), dtype=float)
    ub = np.asarray(u(b.nodes), dtype=float)
    vd, vb = np.isfinite(ud) & np.isfinite(lap), np.isfinite(ub)
    for arr, ok in ((ud, vd), (ub, vb)):
        if np.any(arr[ok] > 1e-10):
            raise NotSubunitaryError(f"u reaches {float(arr[ok].max()):.3e} > 0")
    ud = np.clip(np.where(vd, ud, 0.0), U_FLOOR, 0.0)
    ub = np.clip(np.where(vb, ub, 0.0), U_FLOOR, 0.0)
    hd, hb = energy(q.nodes), energy(b.nodes)
    lhs = _integrate(eval_M(M, ud, 1) * np.where(vd, lap, 0.0) * hd, vd, q)
    mid = _integrate(hb * eval_M(M, ub, 0), vb, b)
    rhs = _integrate(hb, vb, b)
    nx, wx = _excluded(vd, q)
    return EmbeddingReport(inequality_id, lhs, rhs, mid, nx, wx,
                           {"N_r": q.n_radial, "N_theta": q.n_angular, "N_b": b.n_boundary})


def subharmonic_weight_for_field(f, M, h, ws=None):
    """``subharmonic_weight_check`` with ``u = log |f|^2`` and the bundle curvature as its Laplacian."""
    ws = ws if ws is not None else Workspace.build(f)
    return _weighted_field_report(ws, M, h, "subharmonic_weight")


def _weighted_field_report(ws, M, h, ident):
    geo, bg = ws.disk, ws.bdry
    hf = as_field(h) if h is not None else None
    hd = sqnorm(hf(geo.nodes)) if hf is not None else np.ones(len(geo.nodes))
    hb = sqnorm(hf(bg.nodes)) if hf is not None else np.ones(len(bg.nodes))
    dM, Mb = ws.factor_values(M)
    lhs = _integrate(dM * geo.curvature * hd, geo.valid, ws.q)
    mid = _integrate(hb * Mb, bg.valid, ws.b)
    rhs = _integrate(hb, bg.valid, ws.b)
    nx, wx = _excluded(geo.valid, ws.q)
    return EmbeddingReport(ident, lhs, rhs, mid, nx, wx, ws.quadrature)


def curvature_measure_check(f, psi, M=None, ws=None):
    """Curvature measure weighted by ``psi(-log |f|^2)``.

    The report is the weighted embedding with ``h = 1``; ``extras`` carries the
    total mass of the weighted curvature measure.
    """
    ws = ws if ws is not None else Workspace.build(f)
    M = M if M is not None else build_correcting_factor(psi)
    geo = ws.disk
    ud, _ = ws.log_norms()
    rep = _weighted_field_report(ws, M, None, "curvature_measure")
    mass = _integrate(psi(-ud) * geo.curvature, geo.valid, ws.q)
    return EmbeddingReport(rep.inequality_id, rep.lhs, rep.rhs, rep.mid, rep.excluded_nodes,
                           rep.excluded_weight, rep.quadrature, {"measure_mass": mass})


def bundle_section_check(f, M, p, ws=None):
    """Bundle embedding for the ``xi`` section of ``p`` with ``u = log |f|^2``."""
    ws = ws if ws is not None else Workspace.build(f)
    geo, bg = ws.disk, ws.bdry
    ud, ub = ws.log_norms()
    dM, Mb = ws.factor_values(M)
    (s, _, _), sb = ws.sections("xi", p)
    xd, xb = sqnorm(s), sqnorm(sb)
    lhs = _integrate(np.exp(ud) * dM * geo.curvature * xd, geo.valid, ws.q)
    mid = _integrate(np.exp(ub) * Mb * xb, bg.valid, ws.b)
    rhs = _integrate(xb, bg.valid, ws.b)
    nx, wx = _excluded(geo.valid, ws.q)
    return EmbeddingReport("bundle_section", lhs, rhs, mid, nx, wx, ws.quadrature)


def weighted_dbar_terms(tau, dtau, s, dbs, eps_tau=EPS_TAU):
    """Branch-free ``|dbar(conj(sqrt tau) s)|^2`` per node and the validity mask."""
    a = np.abs(tau)
    ok = a >= eps_tau
    a_safe = np.where(ok, a, 1.0)
    val = (a * sqnorm(dbs) + np.abs(dtau) ** 2 / (4 * a_safe) * sqnorm(s)
           + np.real(np.conj(tau) * dtau / a_safe * inner(dbs, s)))
    return np.where(ok, val, 0.0), ok


def weighted_d_terms(tau, dtau, s, ds, eps_tau=EPS_TAU):
    """Branch-free ``|d(sqrt(tau) s)|^2`` per node and the validity mask."""
    a = np.abs(tau)
    ok = a >= eps_tau
    a_safe = np.where(ok, a, 1.0)
    val = (a * sqnorm(ds) + np.abs(dtau) ** 2 / (4 * a_safe) * sqnorm(s)
           + np.real(np.conj(dtau) * tau / a_safe * inner(ds, s)))
    return np.where(ok, val, 0.0), ok


def _point_section(f, kind, p, z):
    s, ds, dbs = section_derivatives(f, kind, p, z)
    return s[None], ds[None], dbs[None]


def weighted_dbar_norm2(tau, f, p, z, eps_tau=EPS_TAU):
    """``|dbar(conj(tau^(1/2)) xi)|^2`` at ``z`` for the ``xi`` section of ``p``.

    Returns ``None`` where ``|tau(z)| < eps_tau`` (node excluded).
    """
    tau = as_scalar_poly(tau)
    t = tau.derivatives(complex(z), 1)
    s, _, dbs = _point_section(f, "xi", p, z)
    val, ok = weighted_dbar_terms(t[0], t[1], s, dbs, eps_tau)
    return float(val[0]) if ok[0] else None


def weighted_d_norm2(tau, f, p, z, eps_tau=EPS_TAU):
    """``|d(tau^(1/2) zeta)|^2`` at ``z`` for the ``zeta`` section of ``p``."""
    tau = as_scalar_poly(tau)
    t = tau.derivatives(complex(z), 1)
    s, ds, _ = _point_section(f, "zeta", p, z)
    val, ok = weighted_d_terms(t[0], t[1], s, ds, eps_tau)
    return float(val[0]) if ok[0] else None


def two_branch_dbar_norm2(tau, f, p, z):
    """Explicit evaluation with both square-root branches; returns the pair."""
    tau = as_scalar_poly(tau)
    t0, t1 = (complex(v[0]) for v in tau.derivatives(complex(z), 1))
    s, _, dbs = section_derivatives(f, "xi", p, z)
    out = []
    for root in (np.sqrt(t0), -np.sqrt(t0)):
        eta_dbar = np.conj(root) * dbs + np.conj(t1 / (2 * root)) * s
        out.append(float(np.sum(np.abs(eta_dbar) ** 2)))
    return tuple(out)


def two_branch_d_norm2(tau, f, p, z):
    tau = as_scalar_poly(tau)
    t0, t1 = (complex(v[0]) for v in tau.derivatives(complex(z), 1))
    s, ds, _ = section_derivatives(f, "zeta", p, z)
    out = []
    for root in (np.sqrt(t0), -np.sqrt(t0)):
        eta_d = root * ds + (t1 / (2 * root)) * s
        out.append(float(np.sum(np.abs(eta_d) ** 2)))
    return tuple(out)


@dataclass(frozen=True)
class SizeCheck:
    margin: float
    z: complex
    passed: bool
    nodes: int


def size_condition(f, tau, psi, disk_nodes=None, n_boundary=GATE_BOUNDARY, tol=SIZE_TOL):
    """Worst ``phi(|f(z)|) - |tau(z)|`` over a boundary grid plus the given disk nodes."""
    f, tau = as_field(f), as_scalar_poly(tau)
    bnodes = np.exp(2j * np.pi * np.arange(n_boundary) / n_boundary)
    fb = np.sqrt(f.norm2(bnodes))
    if fb.max() > 1.0 + 1e-12:
        raise NotSubunitaryError(f"sup |f| on the boundary grid is {fb.max():.15g} > 1")
    nodes = bnodes if disk_nodes is None else np.concatenate([bnodes, np.asarray(disk_nodes)])
    s = np.minimum(np.sqrt(f.norm2(nodes)), 1.0)
    margins = phi(psi, s) - np.abs(tau(nodes))
    i = int(np.argmin(margins))
    m = float(margins[i])
    return SizeCheck(m, complex(nodes[i]), m >= -tol, int(nodes.size))


def weighted_section_checks(f, tau, psi, p_xi, p_zeta, ws=None, gate=True, eps_tau=EPS_TAU):
    """Four reports: curvature-weighted and square-root-weighted embeddings for both section kinds.

    Ids: ``xi_curvature`` (rhs = boundary energy), ``xi_sqrt_dbar`` (rhs = 2x),
    ``zeta_curvature``, ``zeta_sqrt_d``.
    """
    ws = ws if ws is not None else Workspace.build(f)
    tau = as_scalar_poly(tau)
    if gate:
        chk = size_condition(ws.f, tau, psi, ws.q.nodes)
        if not chk.passed:
            raise SizeConditionError(chk.margin, chk.z)
    geo, bg = ws.disk, ws.bdry
    t = tau.derivatives(geo.nodes, 1)
    at = np.abs(t[0])
    out = {}
    for kind, p in (("xi", p_xi), ("zeta", p_zeta)):
        (s, ds, dbs), sb = ws.sections(kind, p)
        energy = _integrate(sqnorm(sb), bg.valid, ws.b)
        curv = _integrate(at * geo.curvature * sqnorm(s), geo.valid, ws.q)
        if kind == "xi":
            vals, ok = weighted_dbar_terms(t[0], t[1], s, dbs, eps_tau)
        else:
            vals, ok = weighted_d_terms(t[0], t[1], s, ds, eps_tau)
        mask = geo.valid & ok
        sq = _integrate(vals, mask, ws.q)
        nx, wx = _excluded(geo.valid, ws.q)
        sx, sw = _excluded(mask, ws.q)
        out[f"{kind}_curvature"] = EmbeddingReport(f"{kind}_curvature", curv, energy, None, nx, wx,
                                                   ws.quadrature)
        ident = "xi_sqrt_dbar" if kind == "xi" else "zeta_sqrt_d"
        out[ident] = EmbeddingReport(ident, sq, 2.0 * energy, None, sx, sw, ws.quadrature)
    return out


def carleson_box_norm(points, masses, max_level=8):
    """``max_I mu(Q(I)) / |I|`` over dyadic arcs of levels ``0..max_level``.

    Arc lengths are normalized (the full circle has length 1) and the box over
    an arc ``I`` is ``{z : arg z in I, 1 - |z| <= |I|}``.
    """
    z = np.asarray(points, dtype=complex).ravel()
    m = np.asarray(masses, dtype=float).ravel()
    if z.size == 0:
        return 0.0
    if np.any(np.abs(z) >= 1.0):
        raise ValueError("point masses must lie in the open disk")
    frac = (np.angle(z) / (2 * np.pi)) % 1.0
    depth = 1.0 - np.abs(z)
    best = 0.0
    for k in range(max_level + 1):
        size = 2.0**-k
        idx = np.minimum((frac * 2**k).astype(np.int64), 2**k - 1)
        inside = depth <= size
        sums = np.bincount(idx[inside], weights=m[inside], minlength=2**k)
        best = max(best, float(sums.max()) / size)
    return best
