import math
import numpy as np
import pytest

from hardylab.bezout import (BezoutProblem, CommonZeroError, InfeasibleError, boundary_grid,
                             check_size_condition, coefficient_residual, common_zeros,
                             convolution_matrix, minimize_sup, solve, solve_exact, lower_bound_sweep,
                             verify_R)
from hardylab.correcting import psi_exponential
from hardylab.disk_core import PolyVecField, ScalarPoly
from hardylab.suites import bezout_roundtrip_suite

SQ2 = math.sqrt(2)


def test_trivial_instance():
    cert = solve_exact(BezoutProblem(PolyVecField([[1], [0]]), ScalarPoly([1])))
    assert np.allclose(cert.g.coeffs[:, 0], [1, 0]) and cert.coefficient_residual == 0
    assert cert.boundary_residual == 0


def test_demo_min_energy_and_min_sup(demo_f, demo_t):
    P = BezoutProblem(demo_f, demo_t)
    first = solve_exact(P)
    assert first.accepted() and first.coefficient_residual <= 1e-12
    assert first.null_dim > 0
    cert = minimize_sup(P, first)
    assert cert.g_sup <= SQ2 + 1e-9 and cert.g_sup <= first.g_sup
    assert cert.boundary_residual <= 1e-10 and cert.r_report.passed()
    assert all(b <= a for a, b in zip(cert.history, cert.history[1:]))


def test_demo_degree_three(demo_f, demo_t):
    cert = solve(BezoutProblem(demo_f, demo_t, degree=3))
    assert cert.degree == 3 and cert.g_sup <= SQ2 + 1e-9


def test_hand_solution_is_exact(demo_f, demo_t):
    g = PolyVecField([[0, SQ2], [0, 0]])
    res = coefficient_residual(demo_f, g, demo_t)
    assert res <= 1e-15
    rep = verify_R(demo_f, demo_t, g)
    assert rep.passed()


def test_coefficient_residual_is_exact():
    f = PolyVecField([[1, 1], [0, 1]])
    g = PolyVecField([[1], [-1]])
    assert coefficient_residual(f, g, ScalarPoly([1])) == 0
    # 1.5 (1 + z) - z = 1.5 + 0.5 z differs from 1 by exactly 0.5 in each coefficient
    assert coefficient_residual(f, PolyVecField([[1.5], [-1]]), ScalarPoly([1])) == 0.5


def test_convolution_matrix_shape():
    f = PolyVecField([[1, 2, 3], [0, 1, 0]])
    S = convolution_matrix(f, 2)
    assert S.shape == (5, 6)
    g = np.arange(6, dtype=complex)
    want = np.convolve(g[:3], f.coeffs[0]) + np.convolve(g[3:], f.coeffs[1])
    assert np.allclose(S @ g, want)


def test_common_zero_infeasible():
    f = PolyVecField([[0, 1], [0, 1]]).scaled(1 / SQ2)
    with pytest.raises(CommonZeroError) as info:
        solve_exact(BezoutProblem(f, ScalarPoly([1])))
    assert abs(info.value.zeros[0][0]) < 1e-12
    for D in (2, 5, 8):
        with pytest.raises(InfeasibleError):
            solve_exact(BezoutProblem(f, ScalarPoly([1]), degree=D))
    # tau vanishing to the same order removes the obstruction
    assert solve_exact(BezoutProblem(f, ScalarPoly([0, 1]))).accepted()


def test_common_zero_on_the_circle():
    f = PolyVecField([[-1, 1], [1, -1]])
    assert common_zeros(f)
    with pytest.raises(CommonZeroError):
        solve_exact(BezoutProblem(f, ScalarPoly([1])))


def test_perturbed_g_detected(demo_f, demo_t):
    cert = solve_exact(BezoutProblem(demo_f, demo_t))
    c = np.array(cert.g.coeffs)
    c[0, 1] += 1e-3
    rep = verify_R(demo_f, demo_t, PolyVecField(c))
    assert rep.square_residual > 1e-4


def test_zero_data_verify_R():
    rep = verify_R(PolyVecField([[1], [0]]), ScalarPoly([0]), PolyVecField([[0], [0]]))
    assert rep.square_residual == rep.range_residual == 0


def test_size_gate(demo_f, demo_t):
    psi = psi_exponential()
    assert check_size_condition(demo_f, demo_t, psi).passed
    assert check_size_condition(demo_f, ScalarPoly([0]), psi).margin >= 0
    assert not check_size_condition(PolyVecField([[0.1, 0.1], [0.1, 0]]), ScalarPoly([1]), psi).passed


def test_zero_null_space_is_returned_unchanged():
    P = BezoutProblem(PolyVecField([[1]]), ScalarPoly([0.5, 0.5]))
    first = solve_exact(P)
    assert first.null_dim == 0
    assert minimize_sup(P, first) is first


def test_lower_bound_sweep_closed_form():
    rows = lower_bound_sweep([0.25, 0.5, 1.0, 2.0])
    for r in rows:
        assert r.g_sup == pytest.approx(math.sqrt(1 + r.delta_prime**2) / r.delta_prime, rel=1e-8)
    sups = [r.g_sup for r in rows]
    assert all(b < a for a, b in zip(sups, sups[1:]))
    assert rows[2].g_sup == pytest.approx(SQ2, rel=1e-8)
    assert lower_bound_sweep([]) == []


def test_small_roundtrip():
    res = bezout_roundtrip_suite(seed=3, count=8)
    assert res.passed, [c for c in res.checks if not c.passed]


def test_boundary_grid():
    z = boundary_grid(16)
    assert np.allclose(np.abs(z), 1) and z[0] == 1
