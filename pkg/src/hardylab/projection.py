"""Projection bundle of a vector polynomial: Pi(z) onto span{f(z)} and its derivatives.

For a column ``f`` the closed forms are

    Pi    = f f^* / |f|^2
    dPi   = (I - Pi) f' f^* / |f|^2
    dbarPi = dPi^*
    |dPi|^2 = (|f|^2 |f'|^2 - |<f', f>|^2) / |f|^4 = Delta log |f|^2

Finite differences appear only in the ``*_fd`` oracles used by the checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .disk_core import PolyVecField, as_field, evaluate_chunked, laplacian_fd

FIBER_EPS = 1e-9


class VanishingFiberError(ValueError):
    def __init__(self, z, norm):
        super().__init__(f"vanishing fiber: |f(z)| = {norm:.3e} at z = {complex(z)!r}")
        self.z = complex(z)


@dataclass(frozen=True)
class ProjectionSample:
    z: complex
    Pi: np.ndarray
    dPi: np.ndarray
    dbarPi: np.ndarray


@dataclass(frozen=True)
class NodeGeometry:
    """Everything about ``f`` needed at a fixed node set, computed once.

    ``valid`` marks nodes whose fiber norm is at least ``eps``; quantities at
    the other nodes are zero-filled and must be excluded by the caller.
    """

    nodes: np.ndarray = field(repr=False)
    f: np.ndarray = field(repr=False)
    df: np.ndarray = field(repr=False)
    norm2: np.ndarray = field(repr=False)
    Pi: np.ndarray = field(repr=False)
    dPi: np.ndarray = field(repr=False)
    curvature: np.ndarray = field(repr=False)
    valid: np.ndarray = field(repr=False)

    @property
    def dbarPi(self):
        return np.conj(np.swapaxes(self.dPi, -1, -2))

    @property
    def u(self):
        """``log |f|^2`` (``-inf`` at excluded nodes)."""
        with np.errstate(divide="ignore"):
            return np.log(self.norm2)


def node_geometry(f, nodes, eps=FIBER_EPS):
    f = as_field(f)
    nodes = np.asarray(nodes, dtype=complex).ravel()

    def frames(zs):
        vals = f.derivatives(zs, 1)
        norm2, Pi, dPi, curv = kernels.projection_frames(vals[0], vals[1])
        # pack into one array so chunked evaluation can concatenate it
        n = vals.shape[2]
        return np.concatenate([
            vals[0], vals[1], norm2[:, None].astype(complex), curv[:, None].astype(complex),
            Pi.reshape(-1, n * n), dPi.reshape(-1, n * n)], axis=1)

    n = f.dim
    packed = evaluate_chunked(frames, nodes)
    fz = packed[:, :n]
    dfz = packed[:, n:2 * n]
    norm2 = packed[:, 2 * n].real.copy()
    curv = packed[:, 2 * n + 1].real.copy()
    Pi = packed[:, 2 * n + 2:2 * n + 2 + n * n].reshape(-1, n, n)
    dPi = packed[:, 2 * n + 2 + n * n:].reshape(-1, n, n)
    valid = norm2 >= eps * eps
    return NodeGeometry(nodes, fz, dfz, norm2, Pi, dPi, curv, valid)


def _single(f, z, eps):
    g = node_geometry(f, np.array([z]), eps=0.0)
    norm = float(np.sqrt(g.norm2[0]))
    if norm < eps:
        raise VanishingFiberError(z, norm)
    return g


def projection(f, z, eps=FIBER_EPS):
    g = _single(f, z, eps)
    dPi = g.dPi[0]
    return ProjectionSample(complex(z), g.Pi[0], dPi, np.conj(dPi.T))


def curvature(f, z, eps=FIBER_EPS):
    """``|dPi(z)|^2``, equal to the normalized Laplacian of ``log |f|^2``."""
    c = float(_single(f, z, eps).curvature[0])
    return 0.0 if c < 0.0 else c


def projection_matrix(f, z):
    """Plain ``Pi(z)`` for finite-difference oracles (no derivative work)."""
    v = as_field(f)(complex(z))
    return np.outer(v, np.conj(v)) / np.vdot(v, v).real


def laplacian_projection_fd(f, z, h):
    return laplacian_fd(lambda w: projection_matrix(f, w), z, h)


def opnorm(A):
    """Spectral norm (batched over leading axes)."""
    A = np.asarray(A)
    if A.ndim == 2:
        return float(np.linalg.norm(A, 2))
    return np.linalg.norm(A, ord=2, axis=(-2, -1))


def pdp_identity_residuals(s, laplacian_Pi=None):
    """Operator-norm residuals of the projection-derivative identities.

    Parameters
    ----------
    s : ProjectionSample
    laplacian_Pi : ndarray, optional
        Finite-difference ``Delta Pi``; when given, the curvature identity
        ``Delta Pi = dPi dPi^* - dPi^* dPi`` is checked against it.

    Returns
    -------
    dict
        identity name -> residual
    """
    Pi, D, Db = s.Pi, s.dPi, s.dbarPi
    n = Pi.shape[0]
    Q = np.eye(n) - Pi
    out = {
        "hermitian": opnorm(Pi - Pi.conj().T),
        "idempotent": opnorm(Pi @ Pi - Pi),
        "dbar_is_adjoint": opnorm(Db - D.conj().T),
        "Pi_dPi": opnorm(Pi @ D),
        "dPi_Q": opnorm(D @ Q),
        "dPi_eq_dPi_Pi": opnorm(D - D @ Pi),
        "dPi_eq_Q_dPi": opnorm(D - Q @ D),
        "dbarPi_Pi": opnorm(Db @ Pi),
        "Q_dbarPi": opnorm(Q @ Db),
        "dbarPi_eq_Pi_dbarPi": opnorm(Db - Pi @ Db),
        "dbarPi_eq_dbarPi_Q": opnorm(Db - Db @ Q),
    }
    if laplacian_Pi is not None:
        out["laplacian"] = opnorm(np.asarray(laplacian_Pi) - (D @ D.conj().T - D.conj().T @ D))
    return out


def pdp_residuals_batch(geom):
    """Batched algebraic residuals over a NodeGeometry (valid nodes only)."""
    Pi, D = geom.Pi[geom.valid], geom.dPi[geom.valid]
    Db = np.conj(np.swapaxes(D, -1, -2))
    n = Pi.shape[-1]
    Q = np.eye(n) - Pi
    PiH = np.conj(np.swapaxes(Pi, -1, -2))
    return {
        "hermitian": opnorm(Pi - PiH),
        "idempotent": opnorm(Pi @ Pi - Pi),
        "Pi_dPi": opnorm(Pi @ D),
        "dPi_Q": opnorm(D @ Q),
        "dPi_eq_dPi_Pi": opnorm(D - D @ Pi),
        "dPi_eq_Q_dPi": opnorm(D - Q @ D),
        "dbarPi_Pi": opnorm(Db @ Pi),
        "Q_dbarPi": opnorm(Q @ Db),
        "dbarPi_eq_Pi_dbarPi": opnorm(Db - Pi @ Db),
        "dbarPi_eq_dbarPi_Q": opnorm(Db - Db @ Q),
    }


def curvature_vs_laplacian(f, z, h, eps=FIBER_EPS):
    """``|curvature(f, z) - Delta_fd log |f(z)|^2|``."""
    f = as_field(f)
    z = complex(z)
    for w in (z, z + h, z - h, z + 1j * h, z - 1j * h):
        norm = float(np.sqrt(f.norm2(w)))
        if norm < eps:
            raise VanishingFiberError(w, norm)
    lap = laplacian_fd(lambda w: f.log_norm2(w), z, h)
    return float(abs(curvature(f, z, eps) - float(np.real(lap))))


def random_field(rng, n, degree, sup_target=1.0):
    """Random vector polynomial rescaled so its boundary sup norm is ``sup_target``."""
    c = rng.standard_normal((n, degree + 1)) + 1j * rng.standard_normal((n, degree + 1))
    f = PolyVecField(c)
    return f.scaled(sup_target / f.sup_norm())
