"""Polynomial solutions of ``g f = tau`` with certificates.

``g`` is a row of polynomials of degree at most ``D_g``. The convolution
system is solved in the least-squares sense by SVD; by Parseval the
minimum-norm coefficient vector is also the solution of least boundary energy.
A second phase lowers ``sup |g|`` on a boundary grid by a second-order cone
program over the null space of the system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import clarabel
import numpy as np
import scipy.sparse as sp

from .disk_core import PolyVecField, ScalarPoly, as_field, as_scalar_poly, build_disk_quadrature
from .embedding import size_condition

ROOT_TOL = 1e-8
SOLVE_TOL = 1e-10
SUP_GRID = 2048
EPS_TAU = 1e-12


class InfeasibleError(ValueError):
    def __init__(self, message, rank=None, residual=None, degree=None):
        super().__init__(message)
        self.rank = rank
        self.residual = residual
        self.degree = degree


class CommonZeroError(InfeasibleError):
    def __init__(self, zeros):
        z, mf, mt = zeros[0]
        super().__init__(
            f"f has a common zero at z = {z:.6g} of order {mf} in the closed disk where tau vanishes "
            f"to order {mt}; no bounded solution exists")
        self.zeros = zeros


def boundary_grid(n=SUP_GRID):
    return np.exp(2j * np.pi * np.arange(n) / n)


@dataclass(frozen=True)
class BezoutProblem:
    f: PolyVecField
    tau: ScalarPoly
    psi: object = None
    degree: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "f", as_field(self.f))
        object.__setattr__(self, "tau", as_scalar_poly(self.tau))

    @property
    def solver_degree(self):
        """``D_g``; defaults to ``deg tau + n deg f``."""
        if self.degree is not None:
            return int(self.degree)
        return self.tau.degree + self.f.dim * self.f.degree


def _trim(c, tol=0.0):
    c = np.asarray(c, dtype=complex)
    nz = np.nonzero(np.abs(c) > tol)[0]
    return c[: nz[-1] + 1] if nz.size else c[:0]


def _order_at(coeffs, z0, tol):
    """Vanishing order of a polynomial at ``z0`` (Taylor coefficients below ``tol * scale``)."""
    c = _trim(coeffs)
    if c.size == 0:
        return math.inf
    scale = max(1.0, float(np.abs(c).max()))
    work = c.copy()
    for m in range(c.size):
        if abs(np.polyval(work[::-1], z0)) > tol * scale:
            return m
        work = work[1:] * np.arange(1, work.size)
        work = work / (m + 1)
    return c.size - 1


def common_zeros(f, tau=None, tol=ROOT_TOL):
    """Common zeros of the components of ``f`` in the closed disk.

    Returns ``(z0, order_f, order_tau)`` per zero, where ``order_f`` is the
    smallest vanishing order among the components.
    """
    f = as_field(f)
    comps = [_trim(c) for c in f.coeffs]
    live = [c for c in comps if c.size]
    if not live:
        return [(0j, math.inf, 0)]
    cands = []
    for c in live:
        if c.size > 1:
            cands.extend(np.roots(c[::-1]))
    cands = [complex(z) for z in cands if abs(z) <= 1.0 + tol]
    found = []
    for z0 in cands:
        if any(abs(z0 - w) <= max(tol, 1e-6) for w, _, _ in found):
            continue
        scales = [max(1.0, float(np.abs(c).max())) for c in live]
        if all(abs(np.polyval(c[::-1], z0)) <= 1e-7 * s for c, s in zip(live, scales)):
            of = min(_order_at(c, z0, 1e-7) for c in live)
            ot = _order_at(tau.coeffs, z0, 1e-7) if tau is not None else 0
            found.append((z0, of, ot))
    return found


def obstructions(f, tau, tol=ROOT_TOL):
    """Common zeros where ``tau`` vanishes to lower order than ``f``."""
    return [z for z in common_zeros(f, tau, tol) if z[2] < z[1]]


def convolution_matrix(f, degree):
    """Matrix ``S`` with ``S @ vec(g) = coefficients of sum_k g_k f_k``.

    ``vec(g)`` stacks the components: index ``k * (degree + 1) + i``.
    """
    f = as_field(f)
    n, m = f.dim, f.degree + 1
    S = np.zeros((degree + m, n * (degree + 1)), dtype=complex)
    for k in range(n):
        for i in range(degree + 1):
            S[i:i + m, k * (degree + 1) + i] = f.coeffs[k]
    return S


def coefficient_residual(f, g, tau):
    """Exact infinity-norm of the coefficient defect of ``sum g_k f_k - tau``.

    Inputs are taken as the exact binary values of their floats; the defect is
    accumulated in rationals, so no rounding enters.
    """
    f, g, tau = as_field(f), as_field(g), as_scalar_poly(tau)
    L = max(g.degree + f.degree + 1, tau.degree + 1)
    re = [Fraction(0)] * L
    im = [Fraction(0)] * L
    for k in range(f.dim):
        fr = [Fraction(float(v.real)) for v in f.coeffs[k]]
        fi = [Fraction(float(v.imag)) for v in f.coeffs[k]]
        for i, gv in enumerate(g.coeffs[k]):
            gr, gi = Fraction(float(gv.real)), Fraction(float(gv.imag))
            if gr == 0 and gi == 0:
                continue
            for j in range(len(fr)):
                re[i + j] += gr * fr[j] - gi * fi[j]
                im[i + j] += gr * fi[j] + gi * fr[j]
    for m, tv in enumerate(tau.coeffs):
        re[m] -= Fraction(float(tv.real))
        im[m] -= Fraction(float(tv.imag))
    return max(math.hypot(float(a), float(b)) for a, b in zip(re, im))


@dataclass(frozen=True)
class RReport:
    square_residual: float
    range_residual: float
    nodes: int

    def passed(self, tol=1e-10):
        return self.square_residual <= tol and self.range_residual <= tol


def default_r_grid():
    return np.concatenate([boundary_grid(), build_disk_quadrature(16, 64).nodes])


def verify_R(f, tau, g, grid=None, eps_tau=EPS_TAU):
    """Residuals of ``R^2 = tau R`` and ``(I - Pi) R = 0`` for ``R = f g``."""
    f, tau, g = as_field(f), as_scalar_poly(tau), as_field(g)
    z = default_r_grid() if grid is None else np.asarray(grid, dtype=complex)
    tz = tau(z)
    keep = np.abs(tz) > eps_tau
    z, tz = z[keep], tz[keep]
    if z.size == 0:
        return RReport(0.0, 0.0, 0)
    fz, gz = f(z), g(z)
    R = fz[:, :, None] * gz[:, None, :]
    sq = np.einsum("nij,njk->nik", R, R) - tz[:, None, None] * R
    nrm = np.sum(np.abs(fz) ** 2, axis=1)
    ok = nrm > 0
    Pi = np.where(ok[:, None, None], fz[:, :, None] * np.conj(fz)[:, None, :]
                  / np.where(ok, nrm, 1.0)[:, None, None], 0.0)
    out_of_range = R - np.einsum("nij,njk->nik", Pi, R)
    return RReport(float(np.linalg.norm(sq, 2, axis=(1, 2)).max()),
                   float(np.linalg.norm(out_of_range, 2, axis=(1, 2)).max()), int(z.size))


@dataclass(frozen=True)
class BezoutCertificate:
    g: PolyVecField
    degree: int
    coefficient_residual: float
    boundary_residual: float
    g_sup: float
    r_report: RReport
    null_basis: np.ndarray = field(repr=False)
    history: tuple = ()
    budget_exhausted: bool = False
    method: str = "min_energy"

    @property
    def null_dim(self):
        return self.null_basis.shape[1]

    def accepted(self, tol=1e-10):
        return self.boundary_residual <= tol and self.coefficient_residual <= 1e-12

    def to_dict(self):
        return {
            "g": [[[float(v.real), float(v.imag)] for v in row] for row in self.g.coeffs],
            "degree": self.degree,
            "coefficient_residual": self.coefficient_residual,
            "boundary_residual": self.boundary_residual,
            "g_sup": self.g_sup,
            "R_square_residual": self.r_report.square_residual,
            "R_range_residual": self.r_report.range_residual,
            "null_dim": self.null_dim,
            "history": list(self.history),
            "budget_exhausted": self.budget_exhausted,
            "method": self.method,
        }


def _g_from_vec(x, n, degree):
    return PolyVecField(np.asarray(x).reshape(n, degree + 1))


def _certify(problem, g, degree, null_basis, history=(), exhausted=False, method="min_energy"):
    f, tau = problem.f, problem.tau
    z = boundary_grid()
    gz = g(z)
    bres = float(np.abs(np.sum(gz * f(z), axis=1) - tau(z)).max())
    gsup = float(np.sqrt(np.sum(np.abs(gz) ** 2, axis=1)).max())
    return BezoutCertificate(g, degree, coefficient_residual(f, g, tau), bres, gsup,
                             verify_R(f, tau, g), null_basis, tuple(history) or (gsup,),
                             exhausted, method)


def check_size_condition(f, tau, psi, disk_nodes=None, n_boundary=4096):
    """Worst ``phi(|f|) - |tau|`` over the gate grid; raises if ``sup |f| > 1``."""
    return size_condition(f, tau, psi, disk_nodes, n_boundary)


def solve_exact(problem, degree=None):
    """Minimum-boundary-energy polynomial solution of ``g f = tau``."""
    obs = obstructions(problem.f, problem.tau)
    if obs:
        raise CommonZeroError(obs)
    D = int(degree if degree is not None else problem.solver_degree)
    f, tau = problem.f, problem.tau
    n = f.dim
    S = convolution_matrix(f, D)
    rhs = np.zeros(S.shape[0], dtype=complex)
    t = _trim(tau.coeffs)
    if t.size > rhs.size:
        raise InfeasibleError(f"deg tau = {t.size - 1} exceeds deg g + deg f = {rhs.size - 1}; "
                              f"increase D_g", 0, None, D)
    rhs[:t.size] = t
    U, s, Vh = np.linalg.svd(S)
    top = float(s[0]) if s.size else 0.0
    rank = int(np.sum(s > 1e-12 * top)) if top > 0 else 0
    coef = (U[:, :rank].conj().T @ rhs) / s[:rank]
    x = Vh[:rank].conj().T @ coef
    resid = float(np.abs(S @ x - rhs).max())
    scale = max(1.0, float(np.abs(rhs).max()))
    if resid > SOLVE_TOL * scale:
        raise InfeasibleError(
            f"g f = tau has no polynomial solution with deg g <= {D} "
            f"(rank {rank} of {S.shape[1]} unknowns, least-squares residual {resid:.3e}); "
            f"try a larger D_g", rank, resid, D)
    null = Vh[rank:].conj().T
    return _certify(problem, _g_from_vec(x, n, D), D, null)


def _project(S, rhs, x):
    """One refinement step back onto ``S x = rhs``."""
    r = S @ x - rhs
    dx, *_ = np.linalg.lstsq(S, r, rcond=None)
    return x - dx


def _sup_program(Z, x0, N, n, D):
    """Real-form cone data for ``min t`` s.t. ``|g(z_j)| <= t`` at every grid point.

    Unknowns are ``[t, Re y, Im y]`` with ``g = x0 + N y``.
    """
    G, m = Z.shape[0], N.shape[1]
    a = np.stack([Z @ x0[k * (D + 1):(k + 1) * (D + 1)] for k in range(n)], axis=1)
    B = np.stack([Z @ N[k * (D + 1):(k + 1) * (D + 1)] for k in range(n)], axis=1)
    d = 1 + 2 * n
    H = np.zeros((G, d, 1 + 2 * m))
    c = np.zeros((G, d))
    H[:, 0, 0] = 1.0
    H[:, 1:1 + n, 1:1 + m] = B.real
    H[:, 1:1 + n, 1 + m:] = -B.imag
    H[:, 1 + n:, 1:1 + m] = B.imag
    H[:, 1 + n:, 1 + m:] = B.real
    c[:, 1:1 + n] = a.real
    c[:, 1 + n:] = a.imag
    # cone slack s = b - A x must equal c + H x
    return sp.csc_matrix(-H.reshape(G * d, -1)), c.reshape(-1), d


def minimize_sup(problem, cert, iterations=200, grid_size=SUP_GRID, tol=1e-10):
    """Lower ``sup |g|`` on the boundary grid over the affine solution set.

    The minimax problem is a second-order cone program over the null-space
    coordinates, solved with Clarabel (``iterations`` caps its interior-point
    steps). The returned certificate never has a larger ``g_sup`` than the
    input; ``history`` holds the best value after each phase.
    """
    if cert.null_dim == 0:
        return cert
    f, tau, D = problem.f, problem.tau, cert.degree
    n = f.dim
    z = boundary_grid(grid_size)
    Z = z[:, None] ** np.arange(D + 1)[None, :]
    x0 = cert.g.coeffs.reshape(-1)
    N = cert.null_basis
    m = N.shape[1]
    A, b, d = _sup_program(Z, x0, N, n, D)
    P = sp.csc_matrix((1 + 2 * m, 1 + 2 * m))
    q = np.zeros(1 + 2 * m)
    q[0] = 1.0
    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.max_iter = int(iterations)
    settings.tol_gap_abs = settings.tol_gap_rel = settings.tol_feas = tol
    sol = clarabel.DefaultSolver(P, q, A, b, [clarabel.SecondOrderConeT(d)] * len(z), settings).solve()
    status = str(sol.status)
    history = [cert.g_sup]
    exhausted = not status.endswith("Solved") or status.endswith("AlmostSolved")
    xs = np.asarray(sol.x)
    if xs.size != 1 + 2 * m or not np.all(np.isfinite(xs)):
        return replace(cert, history=tuple(history), budget_exhausted=True, method="min_sup")
    y = xs[1:1 + m] + 1j * xs[1 + m:]
    S = convolution_matrix(f, D)
    rhs = np.zeros(S.shape[0], dtype=complex)
    tt = _trim(tau.coeffs)
    rhs[:tt.size] = tt
    x = _project(S, rhs, x0 + N @ y)
    cand = _certify(problem, _g_from_vec(x, n, D), D, N, method="min_sup")
    if cand.g_sup <= cert.g_sup and cand.coefficient_residual <= max(cert.coefficient_residual, 1e-12):
        history.append(cand.g_sup)
        return replace(cand, history=tuple(history), budget_exhausted=exhausted)
    history.append(cert.g_sup)
    return replace(cert, history=tuple(history), budget_exhausted=exhausted, method="min_sup")


def solve(problem, iterations=200):
    """``solve_exact`` followed by ``minimize_sup``."""
    return minimize_sup(problem, solve_exact(problem), iterations)


@dataclass(frozen=True)
class SweepRow:
    delta_prime: float
    delta: float
    g_sup: float


def sweep_field(delta_prime):
    """``(z, d) / sqrt(1 + d^2)``; its norm on the disk is at least ``d / sqrt(1 + d^2)``."""
    return PolyVecField([[0, 1], [delta_prime, 0]]).scaled(1 / math.sqrt(1 + delta_prime**2))


def lower_bound_sweep(delta_primes, degree=None, iterations=200):
    """Measured ``sup |g|`` for ``g f = 1`` across the ``sweep_field`` family."""
    rows = []
    for d in delta_primes:
        if d <= 0:
            raise ValueError("the family needs d > 0")
        f = sweep_field(float(d))
        q = build_disk_quadrature(32, 128)
        z = np.concatenate([q.nodes, boundary_grid()])
        low = float(np.sqrt(f.norm2(z)).min())
        claimed = d / math.sqrt(1 + d * d)
        if low < claimed - 1e-12:
            raise ValueError(f"family member d = {d} drops to |f| = {low:.6g} below {claimed:.6g}")
        cert = solve(BezoutProblem(f, ScalarPoly([1.0]), degree=degree), iterations)
        rows.append(SweepRow(float(d), low, cert.g_sup))
    return rows
