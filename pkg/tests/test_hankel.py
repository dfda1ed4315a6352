import math

import numpy as np
import pytest

from hardylab.corpus import TAU_SHAPES, corpus_tau, field_family, psi_family
from hardylab.correcting import psi_exponential
from hardylab.disk_core import PolyVecField, ScalarPoly
from hardylab.embedding import Workspace
from hardylab.hankel import (ExcludedBudgetError, basis_polynomials, eval_form, estimate_form_norm,
                             form_from_coefficients, hankel_symmetry_check)

H1 = PolyVecField([[1], [0]])
P2 = PolyVecField([[0, 1], [0, 0]])
TWO_SQRT2 = 2 * math.sqrt(2)


def test_zero_tau(demo_f, demo_ws):
    ev = eval_form(demo_f, ScalarPoly([0]), H1, P2, ws=demo_ws)
    assert ev.value == ev.I == ev.II == ev.III == 0
    assert hankel_symmetry_check(demo_f, ScalarPoly([0]), H1, P2, ws=demo_ws).residual == 0
    assert estimate_form_norm(demo_f, ScalarPoly([0]), 3, ws=demo_ws).value == 0


def test_demo_instance(demo_f, demo_t, demo_ws):
    ev = eval_form(demo_f, demo_t, H1, P2, ws=demo_ws, psi=psi_exponential())
    assert ev.size_ok and abs(ev.I) <= 1e-6
    assert abs(ev.value) <= TWO_SQRT2 * ev.energy1 * ev.energy2 + 1e-12
    assert hankel_symmetry_check(demo_f, demo_t, H1, P2, ws=demo_ws).residual <= 1e-7
    assert estimate_form_norm(demo_f, demo_t, 6, ws=demo_ws).value <= TWO_SQRT2 + 1e-6


def test_constant_field_has_zero_form():
    f = PolyVecField([[0.6], [0.8]])
    ev = eval_form(f, ScalarPoly([0.5, 0.5]), PolyVecField([[1, 1], [0, 2]]), P2)
    assert abs(ev.value) == 0 and hankel_symmetry_check(f, ScalarPoly([1]), H1, P2).residual == 0


@pytest.mark.parametrize("fname", list(field_family()))
def test_parts_and_oracle(fname, rng):
    f = field_family()[fname]
    ws = Workspace.build(f)
    psi = psi_family()["power"]
    tau = corpus_tau(f, TAU_SHAPES["affine"], psi, ws.q.nodes)
    for _ in range(3):
        h1 = PolyVecField(rng.standard_normal((f.dim, 3)) + 1j * rng.standard_normal((f.dim, 3)))
        p2 = PolyVecField(rng.standard_normal((f.dim, 3)) + 1j * rng.standard_normal((f.dim, 3)))
        ev = eval_form(f, tau, h1, p2, ws=ws, psi=psi)
        assert ev.size_ok
        assert abs(ev.I) <= 1e-6 and ev.max_annihilation <= 1e-12
        assert ev.decomposition_residual <= 1e-7 and ev.oracle_residual <= 1e-7
        assert ev.bound_ratio <= TWO_SQRT2 + 1e-6
        assert hankel_symmetry_check(f, tau, h1, p2, ws=ws).residual <= 1e-7


def test_inner_field_with_z_squared_gives_zero(rng):
    """For an inner f and tau = c z^2 every Fourier moment in the boundary formula vanishes."""
    f = field_family()["z_1"]
    ws = Workspace.build(f)
    for _ in range(5):
        h1 = PolyVecField(rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4)))
        p2 = PolyVecField(rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4)))
        assert abs(eval_form(f, ScalarPoly([0, 0, 0.8]), h1, p2, ws=ws).value) <= 1e-14


def test_matrix_form_matches_quadrature(rng):
    f = field_family()["z2_z_1"]
    ws = Workspace.build(f)
    tau = ScalarPoly([0.3, 0.2j, 0.1])
    est = estimate_form_norm(f, tau, 3, ws=ws)
    first, second = basis_polynomials(f.dim, 3)
    a = rng.standard_normal(len(first)) + 1j * rng.standard_normal(len(first))
    c = rng.standard_normal(len(second)) + 1j * rng.standard_normal(len(second))
    h1 = PolyVecField(sum(x * b for x, b in zip(a, first)))
    p2 = PolyVecField(sum(x * b for x, b in zip(c, second)))
    val, n1, n2 = form_from_coefficients(est, a, c)
    ev = eval_form(f, tau, h1, p2, ws=ws)
    assert abs(val - ev.value) <= 1e-12 * max(1, abs(val))
    assert n1 == pytest.approx(ev.energy1, rel=1e-12) and n2 == pytest.approx(ev.energy2, rel=1e-12)
    assert abs(val) <= est.value * n1 * n2 * (1 + 1e-12)


def test_estimate_monotone_and_degree_range(demo_ws):
    f = field_family()["z_1"]
    tau = ScalarPoly([0.4, 0.3])
    vals = [estimate_form_norm(f, tau, D, ws=demo_ws).value for D in range(1, 9)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        estimate_form_norm(f, tau, 13, ws=demo_ws)


def test_excluded_budget():
    f = PolyVecField([[0, 1e-12], [0, 0]])
    with pytest.raises(ExcludedBudgetError):
        eval_form(f, ScalarPoly([1]), H1, P2)
