"""Check suites behind the command-line tools and the acceptance tests.

Each suite returns a :class:`SuiteResult`: named pass/fail checks with the
measured value and its limit, a JSON-ready ``data`` block and CSV tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bezout import (BezoutProblem, boundary_grid, common_zeros, minimize_sup, obstructions,
                     solve_exact, lower_bound_sweep)
from .correcting import (build_correcting_factor, check_matrix_positivity, domination_refinement,
                         eval_M, mass_defect, phi, validate_psi)
from .corpus import TAU_SHAPES, corpus_tau, field_family, psi_family, random_sections
from .disk_core import (PolyVecField, ScalarPoly, build_boundary_quadrature,
                        build_disk_quadrature, disk_integral, green_residual)
from .embedding import (Workspace, carleson_box_norm, weighted_section_checks, curvature_measure_check,
                        subharmonic_weight_for_field, bundle_section_check, size_condition, two_branch_dbar_norm2,
                        weighted_dbar_norm2)
from .hankel import eval_form, estimate_form_norm, hankel_symmetry_check
from .projection import node_geometry, opnorm, pdp_residuals_batch, random_field

TWO_SQRT2 = 2.0 * math.sqrt(2.0)


class NoSamplesError(ValueError):
    pass


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    limit: float
    relation: str = "<="

    @property
    def passed(self):
        if not math.isfinite(self.value):
            return False
        if self.relation == "<=":
            return self.value <= self.limit
        return self.value >= self.limit

    def to_dict(self):
        return {"name": self.name, "value": self.value, "limit": self.limit,
                "relation": self.relation, "passed": self.passed}


@dataclass
class SuiteResult:
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def add(self, name, value, limit, relation="<="):
        c = Check(name, float(value), float(limit), relation)
        self.checks.append(c)
        return c

    def check(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


@dataclass(frozen=True)
class Quadrature:
    n_radial: int = 64
    n_angular: int = 256
    n_boundary: int = 2048

    def rules(self):
        return build_disk_quadrature(self.n_radial, self.n_angular), build_boundary_quadrature(self.n_boundary)

    def doubled(self):
        return Quadrature(2 * self.n_radial, 2 * self.n_angular, 2 * self.n_boundary)

    def workspace(self, f):
        q, b = self.rules()
        return Workspace.build(f, q, b)


# ---------------------------------------------------------------- identities

def monomial_corpus(max_degree=6):
    """``(V, Delta V)`` pairs for ``V = z^a conj(z)^b`` with ``a + b <= max_degree``."""
    out = []
    for a in range(max_degree + 1):
        for b in range(max_degree + 1 - a):
            def V(z, a=a, b=b):
                return z**a * np.conj(z) ** b

            def lap(z, a=a, b=b):
                if a == 0 or b == 0:
                    return np.zeros_like(z)
                return a * b * z ** (a - 1) * np.conj(z) ** (b - 1)

            out.append(((a, b), V, lap))
    return out


def green_closure(quad=Quadrature(), max_degree=6):
    """Worst Green's-formula residual over the monomial corpus and the mass of the disk measure."""
    q, b = quad.rules()
    worst, arg = 0.0, None
    for ab, V, lap in monomial_corpus(max_degree):
        r = green_residual(V, lap, q, b)
        if r > worst:
            worst, arg = r, ab
    mass = float(np.real(disk_integral(lambda z: np.ones(z.shape), q)))
    return worst, arg, mass


def sample_points(rng, f, count, radius=0.9, min_norm=0.2):
    """``count`` uniform points of ``|z| <= radius`` where ``|f(z)| >= min_norm``."""
    got, total, tries = [], 0, 0
    while total < count:
        tries += 1
        if tries > 1000:
            raise NoSamplesError(f"could not find {count} points with |f| >= {min_norm}")
        r = radius * np.sqrt(rng.random(4 * count))
        z = r * np.exp(2j * np.pi * rng.random(4 * count))
        z = z[np.sqrt(f.norm2(z)) >= min_norm]
        got.append(z)
        total += z.size
    return np.concatenate(got)[:count]


def _fd_laplacian_Pi(f, z, h):
    P = lambda w: node_geometry(f, w, eps=0.0).Pi
    return (P(z + h) + P(z - h) + P(z + 1j * h) + P(z - 1j * h) - 4 * P(z)) / (4 * h * h)


def _fd_laplacian_log(f, z, h):
    u = lambda w: np.log(f.norm2(w))
    return (u(z + h) + u(z - h) + u(z + 1j * h) + u(z - 1j * h) - 4 * u(z)) / (4 * h * h)


def identities_suite(seed=0, fields=100, points=100, max_dim=4, max_degree=5, radius=0.9,
                     min_norm=0.2, h=1e-4, order_steps=(4e-3, 2e-3), closed_form_points=1000,
                     green_degree=6, quad=Quadrature(), inject_fault=False):
    """Projection identities, curvature against the Laplacian of ``log |f|^2``, Green closure.

    ``inject_fault`` adds ``1e-3 e_0 e_1^T`` to the analytic ``dPi`` before the
    comparisons. A multiple of the identity would not do: it cancels from the
    commutator in the Laplacian identity.
    """
    if fields * points == 0:
        raise NoSamplesError("no samples: fields and points must both be positive")
    res = SuiteResult()
    rng = np.random.default_rng(seed)
    alg = {}
    lap_res = {s: [] for s in (h, *order_steps)}
    curv_res, curv_neg, gauge, frob = [], 0.0, 0.0, 0.0
    for _ in range(fields):
        n = int(rng.integers(2, max_dim + 1))
        d = int(rng.integers(1, max_degree + 1))
        f = random_field(rng, n, d)
        z = sample_points(rng, f, points, radius, min_norm)
        g = node_geometry(f, z)
        if inject_fault:
            fault = np.zeros((n, n), dtype=complex)
            fault[0, 1] = 1e-3
            g = type(g)(g.nodes, g.f, g.df, g.norm2, g.Pi, g.dPi + fault, g.curvature, g.valid)
        for k, v in pdp_residuals_batch(g).items():
            alg[k] = max(alg.get(k, 0.0), float(np.max(v)))
        D = g.dPi
        Db = np.conj(np.swapaxes(D, -1, -2))
        target = D @ Db - Db @ D
        for s in lap_res:
            lap_res[s].append(opnorm(_fd_laplacian_Pi(f, z, s) - target))
        curv = np.sum(np.abs(D) ** 2, axis=(1, 2))
        curv_res.append(np.abs(curv - _fd_laplacian_log(f, z, h).real))
        curv_neg = max(curv_neg, float(np.max(-g.curvature)))
        frob = max(frob, float(np.max(np.abs(np.sqrt(curv) - opnorm(D)))))
        c = complex(rng.standard_normal(), rng.standard_normal())
        g2 = node_geometry(f.scaled(c), z)
        gauge = max(gauge, float(np.max(np.abs(g2.Pi - g.Pi))),
                    float(np.max(np.abs(g2.curvature - g.curvature))))

    worst_alg = max(alg.values())
    res.add("pdp_algebraic", worst_alg, 1e-10)
    lap_h = np.concatenate(lap_res[h])
    res.add("laplacian_Pi_fd", float(lap_h.max()), 1e-5)
    s0, s1 = order_steps
    e0, e1 = (float(np.sum(np.concatenate(lap_res[s]))) for s in order_steps)
    order = math.log(e0 / e1) / math.log(s0 / s1) if e1 > 0 and e0 > 0 else 0.0
    res.add("laplacian_Pi_order", order, 1.8, ">=")
    curv_all = np.concatenate(curv_res)
    res.add("curvature_vs_laplacian", float(curv_all.max()), 1e-5)
    res.add("curvature_nonnegative", curv_neg, 0.0)
    res.add("rank_one_frobenius_eq_spectral", frob, 1e-12)
    res.add("gauge_invariance", gauge, 1e-12)

    # closed form for (1, z) / sqrt(2)
    f0 = PolyVecField([[1, 0], [0, 1]]).scaled(1 / math.sqrt(2))
    r = np.sqrt(rng.random(closed_form_points)) * 0.999
    zc = r * np.exp(2j * np.pi * rng.random(closed_form_points))
    exact = 1.0 / (1.0 + np.abs(zc) ** 2) ** 2
    closed = float(np.max(np.abs(node_geometry(f0, zc).curvature - exact)))
    res.add("curvature_closed_form", closed, 1e-10)

    worst_green, arg, mass = green_closure(quad, green_degree)
    res.add("green_closure", worst_green, 1e-8)
    res.add("disk_measure_mass", abs(mass - 1.0), 1e-10)

    res.data = {
        "samples": fields * points,
        "pdp_algebraic": alg,
        "laplacian_Pi": {"h": h, "max": float(lap_h.max()), "median": float(np.median(lap_h)),
                         "order_steps": list(order_steps), "order_sums": [e0, e1], "order": order},
        "curvature_vs_laplacian_max": float(curv_all.max()),
        "curvature_closed_form_max": closed,
        "green_closure": {"worst": worst_green, "worst_monomial": list(arg) if arg else None,
                          "max_degree": green_degree, "disk_mass": mass},
        "inject_fault": bool(inject_fault),
    }
    return res


def branch_suite(seed=0, count=1000, tol=1e-12):
    """Branch-free weighted norm against both explicit square-root branches."""
    rng = np.random.default_rng(seed)
    worst, done = 0.0, 0
    while done < count:
        n = int(rng.integers(2, 4))
        f = random_field(rng, n, int(rng.integers(1, 4)))
        tau = ScalarPoly(rng.standard_normal(3) + 1j * rng.standard_normal(3))
        p = PolyVecField(rng.standard_normal((n, 3)) + 1j * rng.standard_normal((n, 3)))
        z = complex(0.95 * math.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random()))
        if abs(tau(z)) <= 1e-6 or f.norm2(z) < 1e-6:
            continue
        val = weighted_dbar_norm2(tau, f, p, z)
        b1, b2 = two_branch_dbar_norm2(tau, f, p, z)
        scale = max(1.0, abs(b1))
        worst = max(worst, abs(val - b1) / scale, abs(val - b2) / scale)
        done += 1
    res = SuiteResult()
    res.add("branch_free_dbar", worst, tol)
    res.data = {"samples": done, "worst_relative": worst}
    return res


# ---------------------------------------------------------- correcting factor

def correcting_grid(nodes=4000, x_min=-1e4):
    """``0`` followed by ``nodes - 1`` geometrically spaced points down to ``x_min``."""
    if nodes < 2:
        raise NoSamplesError("no samples: the correcting-factor grid needs at least 2 nodes")
    return np.concatenate([[0.0], -np.geomspace(1e-6, -x_min, nodes - 1)])


def correcting_suite(psi, r_max=None, grid_nodes=None, ratio=1.05, tail_tol=1e-8,
                     moment_weighted=False, sample_nodes=4000, x_min=-1e4,
                     domination_x_max=100.0, domination_nodes=10_000, seed=0):
    validate_psi(psi)
    M = build_correcting_factor(psi, r_max=r_max, nodes=grid_nodes, ratio=ratio, tail_tol=tail_tol,
                                moment_weighted=moment_weighted)
    res = SuiteResult()
    grid = correcting_grid(sample_nodes, x_min)
    cond = check_matrix_positivity(M, grid)
    res.add("condition_min_determinant", cond.min_determinant, -1e-12, ">=")
    res.add("condition_min_second_derivative", cond.min_second_derivative, -1e-12, ">=")
    m0 = eval_M(M, 0.0)
    res.add("M_at_zero_error", abs(m0 - 1.0), 0.0)
    res.add("mass_telescoping", mass_defect(M), 1e-12)
    coarse, fine, rel, stable = domination_refinement(psi, M, domination_x_max, domination_nodes)
    res.add("domination_refinement_change", rel, 0.10)
    res.add("domination_constant_finite", 0.0 if math.isfinite(fine.c_meas) else 1.0, 0.0)
    far = -250.0 * M.r_max
    tail = eval_M(M, far)
    res.add("M_tail_limit", tail, 1e-100)
    rng = np.random.default_rng(seed)
    s = rng.random(1000) * (1 - 1e-3) + 1e-3
    phi_err = float(np.max(np.abs(phi(psi, s) / (s * s) - psi(np.log(s ** -2.0)))
                           / np.maximum(1.0, psi(np.log(s ** -2.0)))))
    res.add("phi_consistency", phi_err, 1e-12)

    m1, m2 = eval_M(M, grid, 1), eval_M(M, grid, 2)
    mv = eval_M(M, grid, 0)
    res.tables["correcting_factor"] = (["x", "M", "dM", "d2M"],
                                       [list(r) for r in zip(grid, mv, m1, m2)])
    res.data = {
        "psi": psi.describe(),
        "atoms": int(M.masses.size),
        "r_max": M.r_max,
        "normalizer": M.normalizer,
        "moment_weighted": bool(M.moment_weighted),
        "M_at_zero": m0,
        "M_at_minus_500": eval_M(M, -500.0),
        "M_tail": {"x": far, "value": tail},
        "condition": {"min_determinant": cond.min_determinant,
                      "min_second_derivative": cond.min_second_derivative, "argmin": cond.argmin},
        "mass_defect": mass_defect(M),
        "domination": {"coarse": coarse.c_meas, "fine": fine.c_meas, "relative_change": rel,
                       "x_at_max": fine.x_at_max, "skipped": fine.skipped, "stable": bool(stable)},
        "grid_nodes": int(grid.size),
    }
    return res, M


# ---------------------------------------------------------------- embeddings

def section_reports(f, tau, psi, M, p, ws):
    """Every embedding report for one section; ids are stable across calls."""
    reps = {"subharmonic_weight": subharmonic_weight_for_field(f, M, p, ws),
            "bundle_section": bundle_section_check(f, M, p, ws)}
    reps.update(weighted_section_checks(f, tau, psi, p, p, ws=ws, gate=False))
    return reps


def _margin_change(m0, m1):
    return abs(m1 - m0) / max(abs(m0), 1e-10)


def _carleson_norms(ws, M, tau):
    geo = ws.disk
    ok = geo.valid
    dM, _ = ws.factor_values(M)
    w = ws.q.weights
    lap_measure = np.where(ok, w * dM * geo.curvature, 0.0)
    tau_measure = np.where(ok, w * np.abs(tau(geo.nodes)) * geo.curvature, 0.0)
    return {"weighted_curvature": carleson_box_norm(geo.nodes, lap_measure),
            "tau_curvature": carleson_box_norm(geo.nodes, tau_measure)}


def embeddings_suite(f, tau, psi, sections, quad=Quadrature(), refine=False, tol=1e-8):
    """All embedding reports for ``f, tau, psi`` and each section polynomial.

    Raises nothing on a size-condition failure; the gate becomes a failed
    check carrying the offending node.
    """
    if not sections:
        raise NoSamplesError("no samples: no sections to test")
    validate_psi(psi)
    res = SuiteResult()
    ws = quad.workspace(f)
    gate = size_condition(f, tau, psi, ws.q.nodes)
    res.add("size_condition_margin", gate.margin, -1e-10, ">=")
    res.data["size_condition"] = {"margin": gate.margin, "node": [gate.z.real, gate.z.imag],
                                  "nodes": gate.nodes}
    if not gate.passed:
        return res
    M = build_correcting_factor(psi)
    ws2 = quad.doubled().workspace(f) if refine else None
    rows, worst, worst_change = [], math.inf, 0.0
    reports = []
    cm = curvature_measure_check(f, psi, M, ws)
    for i, p in enumerate(sections):
        reps = section_reports(f, tau, psi, M, p, ws)
        fine = section_reports(f, tau, psi, M, p, ws2) if refine else None
        for key, r in reps.items():
            row = [i, key, r.lhs, r.mid if r.mid is not None else "", r.rhs, r.margin]
            d = r.to_dict()
            d["section"] = i
            worst = min(worst, r.margin)
            if refine:
                m1 = fine[key].margin
                ch = _margin_change(r.margin, m1)
                worst_change = max(worst_change, ch)
                row += [m1, ch]
                d["refined"] = fine[key].to_dict()
            rows.append(row)
            reports.append(d)
    chain = max((r["lhs"] - r["mid"] for r in reports if "mid" in r), default=-math.inf)
    res.add("worst_margin", worst, -tol, ">=")
    res.add("chain_lhs_le_mid", chain, tol)
    res.add("curvature_measure_margin", cm.margin, -tol, ">=")
    if refine:
        res.add("refinement_change", worst_change, 0.10)
    header = ["section", "inequality_id", "lhs", "mid", "rhs", "margin"]
    if refine:
        header += ["refined_margin", "relative_change"]
    res.tables["margins"] = (header, rows)
    res.data.update({
        "reports": reports,
        "curvature_measure": cm.to_dict(),
        "carleson_box_norms": _carleson_norms(ws, M, tau),
        "quadrature": ws.quadrature,
    })
    return res


def embedding_corpus_suite(seed=0, sections=20, max_degree=4, quad=Quadrature(), refine=True,
                           tol=1e-8):
    """Embedding reports over the fixed corpus: fields x profiles x tau shapes x random sections."""
    rng = np.random.default_rng(seed)
    res = SuiteResult()
    rows, worst, worst_rel, worst_change = [], math.inf, math.inf, 0.0
    gate_worst, chain = math.inf, -math.inf
    for fname, f in field_family().items():
        ws = quad.workspace(f)
        ws2 = quad.doubled().workspace(f) if refine else None
        secs = random_sections(rng, f.dim, sections, max_degree)
        for pname, psi in psi_family().items():
            M = build_correcting_factor(psi)
            for tname, shape in TAU_SHAPES.items():
                tau = corpus_tau(f, shape, psi, ws.q.nodes)
                for w in (ws, ws2) if refine else (ws,):
                    gate_worst = min(gate_worst, size_condition(f, tau, psi, w.q.nodes).margin)
                for i, p in enumerate(secs):
                    reps = section_reports(f, tau, psi, M, p, ws)
                    fine = section_reports(f, tau, psi, M, p, ws2) if refine else None
                    for key, r in reps.items():
                        worst = min(worst, r.margin)
                        worst_rel = min(worst_rel, r.margin / max(r.rhs, 1e-300))
                        if r.mid is not None:
                            chain = max(chain, r.lhs - r.mid)
                        row = [fname, pname, tname, i, key, r.lhs, r.rhs, r.margin]
                        if refine:
                            ch = _margin_change(r.margin, fine[key].margin)
                            worst_change = max(worst_change, ch)
                            row += [fine[key].margin, ch]
                        rows.append(row)
    res.add("size_condition_margin", gate_worst, -1e-10, ">=")
    res.add("worst_margin", worst, -tol, ">=")
    res.add("chain_lhs_le_mid", chain, tol)
    if refine:
        res.add("refinement_change", worst_change, 0.10)
    header = ["field", "psi", "tau", "section", "inequality_id", "lhs", "rhs", "margin"]
    if refine:
        header += ["refined_margin", "relative_change"]
    res.tables["margins"] = (header, rows)
    res.data = {"reports": len(rows), "worst_margin": worst, "worst_relative_margin": worst_rel,
                "worst_refinement_change": worst_change, "size_condition_worst": gate_worst}
    return res


# ---------------------------------------------------------------- hankel form

def form_suite(f, tau, h1, p2, degrees, psi=None, quad=Quadrature()):
    """Form value and parts, symmetry, and the truncated norm estimates over ``degrees``."""
    res = SuiteResult()
    ws = quad.workspace(f)
    ev = eval_form(f, tau, h1, p2, ws=ws, psi=psi)
    sym = hankel_symmetry_check(f, tau, h1, p2, ws=ws)
    res.add("part_I", abs(ev.I), 1e-6)
    res.add("pointwise_annihilation", ev.max_annihilation, 1e-12)
    res.add("decomposition", ev.decomposition_residual, 1e-7)
    res.add("boundary_oracle", ev.oracle_residual, 1e-7)
    res.add("hankel_symmetry", sym.residual, 1e-7)
    gated = psi is not None and bool(ev.size_ok)
    if gated:
        res.add("bound_ratio", ev.bound_ratio, TWO_SQRT2 + 1e-6)
    rows, ests = [], []
    for D in sorted(set(int(d) for d in degrees)):
        est = estimate_form_norm(f, tau, D, ws=ws)
        ests.append(est)
        rows.append([D, est.value])
    if ests:
        drop = max((ests[i].value - ests[i + 1].value for i in range(len(ests) - 1)), default=0.0)
        res.add("estimate_monotone_drop", drop, 1e-12 * max(1.0, ests[-1].value))
        if gated:
            res.add("estimate_max", max(e.value for e in ests), TWO_SQRT2 + 1e-6)
    res.tables["form_growth"] = (["D", "estimate"], rows)
    data = ev.to_dict()
    data["symmetry_residual"] = sym.residual
    data["decomposition_residual"] = ev.decomposition_residual
    data["oracle_residual"] = ev.oracle_residual
    data["size_gated"] = gated
    data["norm_estimate"] = [e.to_dict() for e in ests]
    data["quadrature"] = ws.quadrature
    res.data = data
    return res


def form_corpus_suite(seed=0, pairs=10, max_degree=4, degrees=range(1, 9), quad=Quadrature()):
    """Form checks over fields x profiles x tau shapes with random section pairs."""
    rng = np.random.default_rng(seed)
    res = SuiteResult()
    worst = {"part_I": 0.0, "annihilation": 0.0, "decomposition": 0.0, "oracle": 0.0,
             "symmetry": 0.0, "bound_ratio": 0.0, "estimate": 0.0, "monotone_drop": -math.inf}
    rows, growth = [], []
    gated_all = True
    for fname, f in field_family().items():
        ws = quad.workspace(f)
        hs = random_sections(rng, f.dim, pairs, max_degree)
        ps = random_sections(rng, f.dim, pairs, max_degree)
        for pname, psi in psi_family().items():
            for tname, shape in TAU_SHAPES.items():
                tau = corpus_tau(f, shape, psi, ws.q.nodes)
                for h1, p2 in zip(hs, ps):
                    ev = eval_form(f, tau, h1, p2, ws=ws, psi=psi)
                    sym = hankel_symmetry_check(f, tau, h1, p2, ws=ws)
                    gated_all &= bool(ev.size_ok)
                    worst["part_I"] = max(worst["part_I"], abs(ev.I))
                    worst["annihilation"] = max(worst["annihilation"], ev.max_annihilation)
                    worst["decomposition"] = max(worst["decomposition"], ev.decomposition_residual)
                    worst["oracle"] = max(worst["oracle"], ev.oracle_residual)
                    worst["symmetry"] = max(worst["symmetry"], sym.residual)
                    worst["bound_ratio"] = max(worst["bound_ratio"], ev.bound_ratio)
                    rows.append([fname, pname, tname, abs(ev.value), abs(ev.I), ev.bound_ratio,
                                 sym.residual])
                prev = None
                for D in degrees:
                    v = estimate_form_norm(f, tau, D, ws=ws).value
                    growth.append([fname, pname, tname, D, v])
                    worst["estimate"] = max(worst["estimate"], v)
                    if prev is not None:
                        worst["monotone_drop"] = max(worst["monotone_drop"], prev - v)
                    prev = v
    res.add("size_condition_all_pass", 0.0 if gated_all else 1.0, 0.0)
    res.add("part_I", worst["part_I"], 1e-6)
    res.add("pointwise_annihilation", worst["annihilation"], 1e-12)
    res.add("decomposition", worst["decomposition"], 1e-7)
    res.add("boundary_oracle", worst["oracle"], 1e-7)
    res.add("hankel_symmetry", worst["symmetry"], 1e-7)
    res.add("bound_ratio", worst["bound_ratio"], TWO_SQRT2 + 1e-6)
    res.add("estimate_max", worst["estimate"], TWO_SQRT2 + 1e-6)
    res.add("estimate_monotone_drop", worst["monotone_drop"], 1e-12)
    res.tables["form_values"] = (["field", "psi", "tau", "abs_L", "abs_I", "bound_ratio",
                                  "symmetry_residual"], rows)
    res.tables["form_growth"] = (["field", "psi", "tau", "D", "estimate"], growth)
    res.data = {k: v for k, v in worst.items()}
    return res


# ---------------------------------------------------------------------- bezout

def bezout_suite(f, tau, psi=None, degree=None, iterations=200, g_sup_limit=None, sweep=None,
                 quad=Quadrature()):
    """Size gate (when ``psi`` is given), exact solve, sup minimization, ``R`` identities.

    A common zero of ``f`` not matched by ``tau`` is reported as a failed
    ``feasible`` check rather than raised.
    """
    res = SuiteResult()
    problem = BezoutProblem(f, tau, psi, degree)
    if psi is not None:
        validate_psi(psi)
        q, _ = quad.rules()
        gate = size_condition(f, tau, psi, q.nodes)
        res.add("size_condition_margin", gate.margin, -1e-10, ">=")
        res.data["size_condition"] = {"margin": gate.margin, "node": [gate.z.real, gate.z.imag]}
    zeros = common_zeros(problem.f, problem.tau)
    obs = obstructions(problem.f, problem.tau)
    res.data["common_zeros"] = [{"z": [z.real, z.imag], "order_f": int(a), "order_tau": int(b)}
                                for z, a, b in zeros]
    if obs:
        res.add("feasible", 1.0, 0.0)
        z, a, b = obs[0]
        res.data["infeasible"] = {"z": [z.real, z.imag], "order_f": int(a), "order_tau": int(b)}
        return res
    res.add("feasible", 0.0, 0.0)
    first = solve_exact(problem)
    cert = minimize_sup(problem, first, iterations)
    res.add("coefficient_residual", cert.coefficient_residual, 1e-12)
    res.add("boundary_residual", cert.boundary_residual, 1e-10)
    res.add("R_square_residual", cert.r_report.square_residual, 1e-10)
    res.add("R_range_residual", cert.r_report.range_residual, 1e-10)
    res.add("sup_not_increased", cert.g_sup - first.g_sup, 0.0)
    if g_sup_limit is not None:
        res.add("g_sup", cert.g_sup, g_sup_limit)
    res.data["certificate"] = cert.to_dict()
    res.data["min_energy_g_sup"] = first.g_sup
    if sweep:
        rows = lower_bound_sweep(sweep, iterations=iterations)
        res.tables["sweep"] = (["delta_prime", "delta", "g_sup"],
                               [[r.delta_prime, r.delta, r.g_sup] for r in rows])
        res.data["sweep"] = [{"delta_prime": r.delta_prime, "delta": r.delta, "g_sup": r.g_sup}
                             for r in rows]
    return res


def planted_instance(rng, max_dim=3, max_f_degree=4, max_g_degree=3):
    """Random ``f`` without common zeros and ``tau = g0 f`` for a random ``g0``."""
    n = int(rng.integers(1, max_dim + 1))
    while True:
        df = int(rng.integers(1, max_f_degree + 1))
        f = PolyVecField(rng.standard_normal((n, df + 1)) + 1j * rng.standard_normal((n, df + 1)))
        if not common_zeros(f):
            break
    dg = int(rng.integers(0, max_g_degree + 1))
    g0 = PolyVecField(rng.standard_normal((n, dg + 1)) + 1j * rng.standard_normal((n, dg + 1)))
    tc = np.zeros(dg + df + 1, dtype=complex)
    for k in range(n):
        tc += np.convolve(g0.coeffs[k], f.coeffs[k])
    return f, ScalarPoly(tc), g0


def bezout_roundtrip_suite(seed=0, count=50, iterations=200):
    rng = np.random.default_rng(seed)
    z = boundary_grid()
    res = SuiteResult()
    worst_gap, worst_coef, worst_bdry, worst_R = -math.inf, 0.0, 0.0, 0.0
    rows = []
    for i in range(count):
        f, tau, g0 = planted_instance(rng)
        planted = float(np.sqrt(np.sum(np.abs(g0(z)) ** 2, axis=1)).max())
        cert = minimize_sup(BezoutProblem(f, tau), solve_exact(BezoutProblem(f, tau)), iterations)
        gap = cert.g_sup - planted
        worst_gap = max(worst_gap, gap)
        worst_coef = max(worst_coef, cert.coefficient_residual)
        worst_bdry = max(worst_bdry, cert.boundary_residual)
        worst_R = max(worst_R, cert.r_report.square_residual, cert.r_report.range_residual)
        rows.append([i, f.dim, f.degree, g0.degree, planted, cert.g_sup, cert.coefficient_residual])
    res.add("recovered_minus_planted_sup", worst_gap, 1e-8)
    res.add("coefficient_residual", worst_coef, 1e-12)
    res.add("boundary_residual", worst_bdry, 1e-10)
    res.add("R_residual", worst_R, 1e-10)
    res.tables["roundtrip"] = (["instance", "n", "deg_f", "deg_g0", "planted_sup", "g_sup",
                                "coefficient_residual"], rows)
    res.data = {"instances": count, "worst_gap": worst_gap}
    return res
