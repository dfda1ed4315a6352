"""Fixed test data shared by the checks, the CLI and the acceptance suite."""

from __future__ import annotations

import math

import numpy as np

from .correcting import phi, psi_exponential, psi_iterated_log, psi_power, psi_step
from .disk_core import PolyVecField, ScalarPoly

SQ2 = math.sqrt(2.0)
SQ3 = math.sqrt(3.0)


def demo_field():
    """``(z, 1) / sqrt(2)``: unimodular on the circle, never below ``1/sqrt(2)``."""
    return PolyVecField([[0, 1], [1, 0]]).scaled(1 / SQ2)


def demo_tau():
    return ScalarPoly([0, 0, 1])


def field_family():
    return {
        "z_1": demo_field(),
        "z2_1": PolyVecField([[0, 0, 1], [1, 0, 0]]).scaled(1 / SQ2),
        "z2_z_1": PolyVecField([[0, 0, 1], [0, 1, 0], [1, 0, 0]]).scaled(1 / SQ3),
    }


def psi_family():
    return {
        "exp": psi_exponential(),
        "power": psi_power(2.0),
        "step": psi_step(5.0),
        "iterated_log": psi_iterated_log(1, 1.0),
    }


TAU_SHAPES = {
    "z2": (0.0, 0.0, 1.0),
    "const": (1.0,),
    "affine": (0.5, 0.5),
}


def max_tau_scale(f, shape, psi, nodes):
    """Largest ``c <= 1`` with ``|c shape(z)| <= phi(|f(z)|)`` at every node."""
    shape = ScalarPoly(shape)
    s = np.minimum(np.sqrt(f.norm2(nodes)), 1.0)
    t = np.abs(shape(nodes))
    room = phi(psi, s)
    pos = t > 0
    if not np.any(pos):
        return 1.0
    return float(min(1.0, np.min(room[pos] / t[pos])))


def gate_nodes(q_nodes, n_boundary=4096):
    b = np.exp(2j * np.pi * np.arange(n_boundary) / n_boundary)
    return np.concatenate([b, np.asarray(q_nodes)])


def corpus_tau(f, shape, psi, q_nodes, safety=0.9):
    """``safety`` times the largest admissible multiple of ``shape``."""
    return ScalarPoly(np.asarray(shape) * safety * max_tau_scale(f, shape, psi, gate_nodes(q_nodes)))


def random_sections(rng, n, count=20, max_degree=4):
    """Random vector polynomials with standard complex Gaussian coefficients."""
    out = []
    for _ in range(count):
        d = int(rng.integers(0, max_degree + 1))
        c = rng.standard_normal((n, d + 1)) + 1j * rng.standard_normal((n, d + 1))
        out.append(PolyVecField(c))
    return out
