"""Correcting factors built from a decreasing integrable profile ``psi``.

The factor is an exponential sum on ``(-inf, 0]``

    N(x) = e psi(0) e^x + e sum_i c_i e^{x / r_i},     M = N / N(0),

where the atoms ``(r_i, w_i)`` discretize the Stieltjes measure ``d(-psi)`` on
``[1, inf)`` by telescoping differences over a geometric grid, and ``c_i = w_i``
(or ``c_i = r_i w_i`` with ``moment_weighted=True``). Every term
``e^{x/r}`` satisfies ``M M'' - M'^2 = 0``, and the positivity of the 2x2
matrix ``[[M, M'], [M', M'']]`` survives positive combinations, so ``M``
inherits it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

E = math.e
EXP_FLOOR = -700.0


class PsiValidationError(ValueError):
    pass


@dataclass(frozen=True)
class PsiFunction:
    """Bounded nonincreasing profile on ``[0, inf)`` given by a vectorized evaluator."""

    func: Callable = field(repr=False)
    psi0: float
    kind: str = "table"
    breakpoints: tuple = ()
    params: tuple = ()

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.asarray(self.func(x), dtype=float)

    def describe(self):
        return {"kind": self.kind, **dict(self.params)}


def psi_exponential(rate=1.0):
    if rate <= 0:
        raise PsiValidationError("rate must be positive")
    return PsiFunction(lambda x: np.exp(-rate * x), 1.0, "exp", (), (("rate", float(rate)),))


def psi_power(power=2.0):
    """``min(1, x**-power)``; integrable for ``power > 1``."""
    if power <= 1:
        raise PsiValidationError("power tail needs exponent > 1 to be integrable")

    def func(x):
        with np.errstate(divide="ignore"):
            return np.minimum(1.0, np.where(x > 0, x, 1.0) ** -power)

    return PsiFunction(func, 1.0, "power", (1.0,), (("power", float(power)),))


def psi_step(width=5.0, height=1.0):
    """``height`` on ``[0, width]`` and zero afterwards."""
    if width <= 0 or height < 0:
        raise PsiValidationError("step needs width > 0 and height >= 0")
    return PsiFunction(lambda x: np.where(x <= width, float(height), 0.0), float(height),
                       "step", (float(width),), (("width", float(width)), ("height", float(height))))


def _tower(depth):
    t = 1.0
    for _ in range(depth):
        t = math.exp(t)
    return t


def psi_iterated_log(depth=1, alpha=1.0):
    """``1 / (x ln x ... ln_{depth-1} x (ln_depth x)^{1+alpha})``, frozen below its start.

    The formula is used from ``x0 = e^e^...^e`` (``depth`` exponentials), where
    every iterated logarithm is at least 1, and held constant on ``[0, x0]``.
    """
    if depth < 1 or depth > 3:
        raise PsiValidationError("iterated-log depth must be 1, 2 or 3")
    if alpha <= 0:
        raise PsiValidationError("alpha must be positive")
    x0 = _tower(depth)

    def tail(x):
        denom = np.array(x, dtype=float)
        logs = np.array(x, dtype=float)
        for k in range(depth):
            logs = np.log(logs)
            denom = denom * (logs ** (1.0 + alpha) if k == depth - 1 else logs)
        return 1.0 / denom

    def func(x):
        return tail(np.maximum(x, x0))

    psi0 = float(tail(np.array(x0)))
    return PsiFunction(func, psi0, "iterated_log", (x0,),
                       (("depth", int(depth)), ("alpha", float(alpha))))


def psi_table(xs, values):
    """Piecewise-linear profile through ``(xs, values)``, zero beyond the last node."""
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=float)
    if xs.ndim != 1 or xs.shape != values.shape or xs.size < 2:
        raise PsiValidationError("table needs matching 1-D xs and values with >= 2 entries")
    if xs[0] != 0.0 or np.any(np.diff(xs) <= 0):
        raise PsiValidationError("table xs must start at 0 and increase strictly")
    if np.any(values < 0) or np.any(np.diff(values) > 1e-12):
        raise PsiValidationError("table values must be nonnegative and nonincreasing")

    def func(x):
        return np.where(x <= xs[-1], np.interp(x, xs, values), 0.0)

    return PsiFunction(func, float(values[0]), "table", tuple(float(v) for v in xs[1:]),
                       (("xs", xs.tolist()), ("values", values.tolist())))


PSI_KINDS = {
    "exp": psi_exponential,
    "power": psi_power,
    "step": psi_step,
    "iterated_log": psi_iterated_log,
    "table": psi_table,
}


def make_psi(params):
    """Build a profile from a ``{"kind": ..., **params}`` mapping."""
    params = dict(params)
    kind = params.pop("kind")
    if kind not in PSI_KINDS:
        raise PsiValidationError(f"unknown psi kind {kind!r}")
    return PSI_KINDS[kind](**params)


@dataclass(frozen=True)
class PsiCheck:
    monotone: bool
    worst_increase: float
    decay_exponent: float
    integral_estimate: float
    integrable: bool


def check_psi(psi, decay_threshold=1.02, blocks=200):
    """Monotonicity on a sampled grid and a block-decay integrability test.

    The integral is split into ``[0, 1]`` and dyadic blocks ``[2^k, 2^{k+1}]``.
    Block integrals of an integrable profile decay faster than ``1/k``; the
    exponent is estimated from blocks ``blocks/2`` and ``blocks``.
    """
    grid = np.unique(np.concatenate([
        np.linspace(0.0, 10.0, 2001), np.geomspace(10.0, 1e12, 4000),
        np.asarray(psi.breakpoints, dtype=float)]))
    vals = psi(grid)
    inc = np.diff(vals)
    worst = float(inc.max()) if inc.size else 0.0
    monotone = worst <= 1e-12 and bool(np.all(vals >= 0)) and vals[0] <= psi.psi0 + 1e-12

    xg, wg = np.polynomial.legendre.leggauss(32)
    head = 0.5 * float(np.sum(wg * psi(0.5 * (xg + 1.0))))
    s = 0.5 * (xg + 1.0) * math.log(2.0)  # log-variable nodes within one block
    ws = 0.5 * wg * math.log(2.0)
    block = np.empty(blocks + 1)
    for k in range(blocks + 1):
        x = 2.0**k * np.exp(s)
        block[k] = float(np.sum(ws * x * psi(x)))
    tail_hi, tail_lo = block[blocks], block[blocks // 2]
    if tail_hi <= 1e-300:
        p = math.inf
    elif tail_lo <= 0:
        p = 0.0
    else:
        p = math.log(tail_lo / tail_hi) / math.log(2.0)
    integral = head + float(np.sum(block))
    return PsiCheck(monotone, worst, p, integral, p > decay_threshold)


def validate_psi(psi):
    rep = check_psi(psi)
    if not rep.monotone:
        raise PsiValidationError(f"psi is not nonincreasing (worst increase {rep.worst_increase:.3e})")
    if not rep.integrable:
        raise PsiValidationError(
            f"psi does not look integrable (block decay exponent {rep.decay_exponent:.3f})")
    return rep


@dataclass(frozen=True)
class CorrectingFactor:
    """Normalized exponential sum ``M = N / N(0)`` on ``(-inf, 0]``.

    ``radii[0] == 1`` holds the head term ``e psi(0) e^x``; the remaining
    entries are the discretized atoms of ``d(-psi)``.
    """

    radii: np.ndarray = field(repr=False)
    coefs: np.ndarray = field(repr=False)
    masses: np.ndarray = field(repr=False)
    normalizer: float
    psi0: float
    psi1: float
    r_max: float
    moment_weighted: bool = False

    @property
    def atom_radii(self):
        return self.radii[1:]

    @property
    def head(self):
        return float(self.coefs[0])

    def raw(self, x, order=0):
        """Unnormalized ``N^{(order)}(x)``."""
        x = np.asarray(x, dtype=float)
        arg = x[..., None] / self.radii
        terms = np.where(arg < EXP_FLOOR, 0.0, np.exp(np.maximum(arg, EXP_FLOOR)))
        terms = terms * (self.coefs * self.radii ** (-float(order)))
        return np.sum(terms, axis=-1)

    def __call__(self, x, order=0):
        return eval_M(self, x, order)


def _auto_rmax(psi, tail_tol, start=2.0, cap=1e15):
    r = max(start, *(2.0 * b for b in psi.breakpoints)) if psi.breakpoints else start
    while float(psi(r)) >= tail_tol:
        r *= 2.0
        if r > cap:
            raise PsiValidationError(f"psi stays above tail_tol={tail_tol} up to {cap:g}")
    return r


def build_correcting_factor(psi, r_max=None, nodes=None, ratio=1.05, tail_tol=1e-8,
                            extend=True, moment_weighted=False):
    """Discretize ``d(-psi)`` and assemble the normalized factor.

    Parameters
    ----------
    psi : PsiFunction
    r_max : float, optional
        Last grid radius. Chosen automatically (doubling from 2) so that
        ``psi(r_max) < tail_tol`` when omitted; a given value that is too small
        is extended the same way unless ``extend`` is false.
    nodes : int, optional
        Number of geometric grid intervals on ``[1, r_max]``; overrides ``ratio``.
    ratio : float
        Geometric ratio of the radius grid.
    moment_weighted : bool
        Weight each atom by its radius. The default reproduces the plain
        Stieltjes sum; the weighted variant keeps ``M'(-x)`` above a fixed
        multiple of ``psi(x)`` on the whole half-line at the price of a larger
        normalizer.
    """
    if r_max is None:
        r_max = _auto_rmax(psi, tail_tol)
    elif float(psi(r_max)) >= tail_tol:
        if not extend:
            raise PsiValidationError(
                f"psi(r_max) = {float(psi(r_max)):.3e} exceeds tail_tol = {tail_tol:g}")
        r_max = _auto_rmax(psi, tail_tol, start=float(r_max))
    r_max = float(r_max)
    if r_max <= 1.0:
        raise PsiValidationError("r_max must exceed 1")
    if nodes is None:
        nodes = max(1, math.ceil(math.log(r_max) / math.log(ratio)))
    grid = r_max ** (np.arange(int(nodes) + 1) / int(nodes))
    grid[0], grid[-1] = 1.0, r_max
    extra = [b for b in psi.breakpoints if 1.0 < b < r_max]
    grid = np.unique(np.concatenate([grid, extra]))

    vals = psi(grid)
    w = vals[:-1] - vals[1:]
    if np.any(w < -1e-12):
        i = int(np.argmin(w))
        raise PsiValidationError(f"psi increases between r={grid[i]:.6g} and r={grid[i + 1]:.6g}")
    w = np.maximum(w, 0.0)
    # interval (r_{i-1}, r_i] is placed at its left end; the tail sits at r_max
    radii = np.concatenate([grid[:-1], [r_max]])
    masses = np.concatenate([w, [vals[-1]]])
    keep = masses > 0
    radii, masses = radii[keep], masses[keep]
    c = masses * radii if moment_weighted else masses

    psi0 = float(psi.psi0)
    all_r = np.concatenate([[1.0], radii])
    all_c = np.concatenate([[E * psi0], E * c])
    proto = CorrectingFactor(all_r, all_c, masses, 1.0, psi0, float(vals[0]), r_max, moment_weighted)
    normalizer = float(proto.raw(0.0))
    if not normalizer > 0:
        raise PsiValidationError("psi is identically zero")
    for arr in (all_r, all_c, masses):
        arr.setflags(write=False)
    return CorrectingFactor(all_r, all_c, masses, normalizer, psi0, float(vals[0]), r_max,
                            moment_weighted)


def eval_M(M, x, order=0):
    """``M``, ``M'`` or ``M''`` at ``x <= 0`` (vectorized)."""
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    xa = np.asarray(x, dtype=float)
    if np.any(xa > 0):
        raise ValueError("the correcting factor lives on (-inf, 0]")
    out = M.raw(xa, order) / M.normalizer
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Condition01Report:
    min_determinant: float
    min_second_derivative: float
    argmin: float
    passed: bool


def check_matrix_positivity(M, grid, tol=1e-12):
    """Minimum over ``grid`` of ``M M'' - M'^2`` and of ``M''``."""
    grid = np.asarray(grid, dtype=float)
    m0, m1, m2 = eval_M(M, grid, 0), eval_M(M, grid, 1), eval_M(M, grid, 2)
    det = np.atleast_1d(m0 * m2 - m1 * m1)
    m2 = np.atleast_1d(m2)
    i = int(np.argmin(det))
    md, ms = float(det[i]), float(m2.min())
    return Condition01Report(md, ms, float(np.atleast_1d(grid)[i]), md >= -tol and ms >= -tol)


def mass_defect(M):
    """``|sum of atoms - psi(1)|``: the telescoping sum should be exact."""
    return abs(math.fsum(M.masses.tolist()) - M.psi1)


@dataclass(frozen=True)
class DominationReport:
    c_meas: float
    x_at_max: float
    skipped: int
    evaluated: int


def measure_domination_constant(psi, M, x_grid):
    """``max psi(x) / M'(-x)`` over ``x_grid`` (nodes with ``M'(-x) < 1e-300`` skipped)."""
    x = np.asarray(x_grid, dtype=float)
    if np.any(x < 0):
        raise ValueError("x_grid must lie in [0, inf)")
    dm = np.atleast_1d(eval_M(M, -x, 1))
    pv = np.atleast_1d(psi(x))
    ok = dm >= 1e-300
    if not np.any(ok):
        raise ValueError("every grid node underflows M'(-x)")
    ratio = np.where(ok, pv / np.where(ok, dm, 1.0), 0.0)
    i = int(np.argmax(ratio))
    return DominationReport(float(ratio[i]), float(x[i]), int((~ok).sum()), int(ok.sum()))


def domination_refinement(psi, M, x_max=100.0, nodes=10_000, tol=0.10):
    """Measured constant on ``nodes`` and ``2 * nodes`` uniform points of ``[0, x_max]``.

    Returns ``(coarse, fine, relative_change, stable)``.
    """
    coarse = measure_domination_constant(psi, M, np.linspace(0.0, x_max, nodes + 1))
    fine = measure_domination_constant(psi, M, np.linspace(0.0, x_max, 2 * nodes + 1))
    rel = abs(fine.c_meas - coarse.c_meas) / max(abs(coarse.c_meas), 1e-300)
    stable = math.isfinite(coarse.c_meas) and math.isfinite(fine.c_meas) and rel <= tol
    return coarse, fine, rel, stable


def phi(psi, s):
    """Size majorant ``s^2 psi(ln s^-2)`` on ``[0, 1]`` (vectorized)."""
    sa = np.asarray(s, dtype=float)
    if np.any(sa < 0) or np.any(sa > 1):
        raise ValueError("phi is defined on [0, 1]")
    pos = sa > 0
    safe = np.where(pos, sa, 1.0)
    x = np.maximum(-2.0 * np.log(safe), 0.0)
    out = np.where(pos, safe * safe * psi(x), 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PhiMajorant:
    psi: PsiFunction

    def __call__(self, s):
        return phi(self.psi, s)

    def check(self, n=1000):
        """``phi(0) = 0``, ``phi(1) = psi(0)`` and ``phi(s)/s^2`` nondecreasing on a grid."""
        s = np.linspace(1e-6, 1.0, n)
        q = phi(self.psi, s) / (s * s)
        return (phi(self.psi, 0.0) == 0.0
                and abs(phi(self.psi, 1.0) - self.psi.psi0) <= 1e-15
                and bool(np.all(np.diff(q) >= -1e-12)))
