"""Quadrature on the disk and circle, polynomial vector fields, Wirtinger calculus.

Conventions used across the package:

* ``Delta`` is the normalized Laplacian ``d dbar = (1/4)(d_xx + d_yy)``.
* The disk measure is ``mu = (2/pi) log(1/|z|) dA``; it has total mass 1 and
  satisfies Green's formula ``int_T V dm - V(0) = int_D Delta V dmu``.
* Boundary integrals use the normalized arc length ``dm`` (``m(T) = 1``).
* Inner products are linear in the first slot: ``<u, v> = v^* u``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels

DEFAULT_N_RADIAL = 64
DEFAULT_N_ANGULAR = 256
DEFAULT_N_BOUNDARY = 2048

# fixed evaluation/reduction block; never depends on the worker count
CHUNK = 4096


class NonFiniteIntegrandError(ValueError):
    def __init__(self, node):
        super().__init__(f"integrand is not finite at node z = {complex(node)!r}")
        self.node = complex(node)


def worker_count():
    """Worker cap from ``HARDYLAB_THREADS`` (default 1). Results never depend on it."""
    try:
        return max(1, int(os.environ.get("HARDYLAB_THREADS", "1")))
    except ValueError:
        return 1


def evaluate_chunked(func, nodes):
    """Evaluate a vectorized callable over fixed-size blocks of ``nodes``."""
    nodes = np.asarray(nodes)
    blocks = [nodes[i:i + CHUNK] for i in range(0, nodes.shape[0], CHUNK)]
    if not blocks:
        return np.asarray(func(nodes))
    threads = min(worker_count(), len(blocks))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(func, blocks))
    else:
        parts = [func(b) for b in blocks]
    return np.concatenate([np.asarray(p) for p in parts], axis=0)


def reduce_sum(values):
    """Deterministic sum along axis 0: tree sums per block, then a tree over blocks."""
    values = np.asarray(values)
    N = values.shape[0]
    if N <= CHUNK:
        return kernels.tree_sum(values)
    parts = np.stack([kernels.tree_sum(values[i:i + CHUNK]) for i in range(0, N, CHUNK)])
    return kernels.tree_sum(parts)


@dataclass(frozen=True)
class DiskQuadrature:
    """Tensor rule for ``int_D g dmu`` with ``mu = (2/pi) log(1/|z|) dA``.

    Radial nodes are Gauss-Legendre in ``t`` with ``r = t**2``, which absorbs
    the ``r log r`` endpoint behaviour of the weight at the origin.
    """

    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    n_radial: int
    n_angular: int
    r_min: float
    r_max: float

    def __len__(self):
        return self.nodes.shape[0]


@dataclass(frozen=True)
class BoundaryQuadrature:
    """Trapezoid rule on the unit circle for the normalized measure ``m``."""

    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    n_boundary: int

    def __len__(self):
        return self.nodes.shape[0]


def build_disk_quadrature(n_radial=DEFAULT_N_RADIAL, n_angular=DEFAULT_N_ANGULAR):
    if int(n_radial) < 4 or int(n_angular) < 8:
        raise ValueError(f"need n_radial >= 4 and n_angular >= 8, got {n_radial}, {n_angular}")
    n_radial, n_angular = int(n_radial), int(n_angular)
    x, w = np.polynomial.legendre.leggauss(n_radial)
    t = 0.5 * (x + 1.0)
    wt = 0.5 * w
    r = t * t
    # dr = 2 t dt; log(1/r) = -2 log t
    wr = (2.0 / np.pi) * (-2.0 * np.log(t)) * r * (2.0 * t * wt) * (2.0 * np.pi / n_angular)
    theta = 2.0 * np.pi * np.arange(n_angular) / n_angular
    nodes = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    weights = np.repeat(wr, n_angular)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return DiskQuadrature(nodes, weights, n_radial, n_angular, float(r[0]), float(r[-1]))


def build_boundary_quadrature(n_boundary=DEFAULT_N_BOUNDARY):
    if int(n_boundary) < 8:
        raise ValueError(f"need n_boundary >= 8, got {n_boundary}")
    n_boundary = int(n_boundary)
    nodes = np.exp(2j * np.pi * np.arange(n_boundary) / n_boundary)
    weights = np.full(n_boundary, 1.0 / n_boundary)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return BoundaryQuadrature(nodes, weights, n_boundary)


def _check_finite(values, nodes):
    finite = np.isfinite(values)
    if finite.ndim > 1:
        finite = finite.reshape(finite.shape[0], -1).all(axis=1)
    if not finite.all():
        raise NonFiniteIntegrandError(nodes[np.argmin(finite)])


def integrate_values(values, rule):
    """Weighted deterministic sum of precomputed node values (axis 0 = nodes)."""
    values = np.asarray(values)
    _check_finite(values, rule.nodes)
    w = rule.weights.reshape((-1,) + (1,) * (values.ndim - 1))
    return reduce_sum(w * values)


def disk_integral(g, q):
    """``int_D g dmu`` for a vectorized callable ``g``."""
    return integrate_values(evaluate_chunked(g, q.nodes), q)


def boundary_integral(g, b):
    """``int_T g dm`` for a vectorized callable ``g``."""
    return integrate_values(evaluate_chunked(g, b.nodes), b)


def green_residual(V, lap_V, q=None, b=None):
    """``|int_T V dm - V(0) - int_D Delta V dmu|``; ``lap_V`` is the normalized Laplacian."""
    q = q if q is not None else build_disk_quadrature()
    b = b if b is not None else build_boundary_quadrature()
    boundary = boundary_integral(V, b)
    center = np.asarray(V(np.zeros(1, dtype=complex)))[0]
    interior = disk_integral(lap_V, q)
    return float(abs(boundary - center - interior))


def wirtinger_fd(g, z, h):
    """Central-difference ``(d g, dbar g)`` at ``z``; test oracle, O(h**2)."""
    z = complex(z)
    if abs(z) + 2 * h >= 1.0:
        raise ValueError(f"step h={h} too large at |z|={abs(z):.6g}")
    gx = (np.asarray(g(z + h)) - np.asarray(g(z - h))) / (2 * h)
    gy = (np.asarray(g(z + 1j * h)) - np.asarray(g(z - 1j * h))) / (2 * h)
    return 0.5 * (gx - 1j * gy), 0.5 * (gx + 1j * gy)


def laplacian_fd(g, z, h):
    """Five-point normalized Laplacian ``(1/4)(g_xx + g_yy)`` at ``z``."""
    z = complex(z)
    if abs(z) + 2 * h >= 1.0:
        raise ValueError(f"step h={h} too large at |z|={abs(z):.6g}")
    s = (np.asarray(g(z + h)) + np.asarray(g(z - h)) + np.asarray(g(z + 1j * h))
         + np.asarray(g(z - 1j * h)) - 4 * np.asarray(g(z)))
    return s / (4 * h * h)


@dataclass(frozen=True)
class PolyVecField:
    """Analytic vector polynomial ``f(z) = sum_j c[:, j] z**j`` with values in C^n."""

    coeffs: np.ndarray
    sup_norm_le_one: bool = False

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim == 1:
            c = c[None, :]
        if c.ndim != 2 or c.shape[1] == 0:
            raise ValueError("coefficients must be an (n, d + 1) table")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_components(cls, *components):
        """Build from per-component ascending coefficient lists (zero padded)."""
        d = max(len(c) for c in components)
        table = np.zeros((len(components), d), dtype=complex)
        for k, c in enumerate(components):
            table[k, :len(c)] = c
        return cls(table)

    @property
    def dim(self):
        return self.coeffs.shape[0]

    @property
    def degree(self):
        return self.coeffs.shape[1] - 1

    def derivatives(self, z, order=1):
        """Stack of ``f, f', ..., f^(order)`` at the points ``z``; shape (order+1, N, n)."""
        z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
        return kernels.poly_eval(self.coeffs, z, order)

    def __call__(self, z):
        scalar = np.ndim(z) == 0
        out = self.derivatives(z, 0)[0]
        return out[0] if scalar else out

    def derivative(self, z):
        scalar = np.ndim(z) == 0
        out = self.derivatives(z, 1)[1]
        return out[0] if scalar else out

    def norm2(self, z):
        v = self(z)
        return np.sum(np.abs(v) ** 2, axis=-1)

    def log_norm2(self, z):
        return np.log(self.norm2(z))

    def scaled(self, c):
        return PolyVecField(self.coeffs * c)

    def times_z(self, power=1):
        """``z**power * f``."""
        pad = np.zeros((self.dim, power), dtype=complex)
        return PolyVecField(np.concatenate([pad, self.coeffs], axis=1))

    def drop_constant(self):
        c = np.array(self.coeffs)
        c[:, 0] = 0
        return PolyVecField(c)

    def reflected(self):
        """``f#(z) = conj(f(conj z))``: conjugate coefficients."""
        return PolyVecField(np.conj(self.coeffs))

    def sup_norm(self, n_grid=4096):
        b = np.exp(2j * np.pi * np.arange(n_grid) / n_grid)
        return float(np.sqrt(self.norm2(b).max()))

    def with_sup_check(self, n_grid=4096):
        """Copy with ``sup_norm_le_one`` set from a boundary grid check."""
        return replace(self, sup_norm_le_one=self.sup_norm(n_grid) <= 1.0 + 1e-12)


@dataclass(frozen=True)
class ScalarPoly:
    """Scalar analytic polynomial, ascending coefficients."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.array(self.coeffs, dtype=complex)).ravel()
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self):
        return self.coeffs.shape[0] - 1

    def derivatives(self, z, order=1):
        z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
        return kernels.poly_eval(self.coeffs[None, :], z, order)[:, :, 0]

    def __call__(self, z):
        scalar = np.ndim(z) == 0
        out = self.derivatives(z, 0)[0]
        return out[0] if scalar else out

    def derivative(self, z):
        scalar = np.ndim(z) == 0
        out = self.derivatives(z, 1)[1]
        return out[0] if scalar else out

    def scaled(self, c):
        return ScalarPoly(self.coeffs * c)

    def reflected(self):
        return ScalarPoly(np.conj(self.coeffs))

    def is_zero(self):
        return not np.any(self.coeffs)


def as_scalar_poly(tau):
    return tau if isinstance(tau, ScalarPoly) else ScalarPoly(tau)


def as_field(p):
    return p if isinstance(p, PolyVecField) else PolyVecField(p)
