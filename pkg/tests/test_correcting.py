import math

import numpy as np
import pytest

from hardylab.correcting import (PhiMajorant, PsiValidationError, build_correcting_factor,
                                 check_matrix_positivity, check_psi, domination_refinement, eval_M,
                                 make_psi, mass_defect, measure_domination_constant, phi,
                                 psi_exponential, psi_iterated_log, psi_power, psi_step,
                                 validate_psi)
from hardylab.corpus import psi_family

GRID = np.concatenate([[0.0], -np.geomspace(1e-6, 1e4, 3000)])


@pytest.mark.parametrize("name", list(psi_family()))
def test_family_construction(name):
    psi = psi_family()[name]
    validate_psi(psi)
    M = build_correcting_factor(psi)
    assert eval_M(M, 0.0) == 1.0
    assert mass_defect(M) <= 1e-12
    assert check_matrix_positivity(M, GRID).passed
    _, fine, rel, stable = domination_refinement(psi, M)
    assert stable and math.isfinite(fine.c_meas) and rel <= 0.1
    assert 0 <= eval_M(M, -50.0) <= eval_M(M, -1.0)
    assert np.all(np.diff(eval_M(M, GRID[::-1])) >= 0)
    assert eval_M(M, -250 * M.r_max) < 1e-100


def test_exponential_mass_sums_to_psi_one():
    M = build_correcting_factor(psi_exponential())
    assert abs(math.fsum(M.masses.tolist()) - math.exp(-1)) <= 1e-12
    assert np.all(M.masses >= 0) and np.all(M.coefs > 0)


def test_step_example_by_hand():
    M = build_correcting_factor(psi_step(5.0))
    assert np.allclose(M.atom_radii, [5.0]) and np.allclose(M.masses, [1.0])
    x = -1.3
    hand = (math.e * math.exp(x) + math.e * math.exp(x / 5)) / (2 * math.e)
    assert abs(eval_M(M, x) - hand) <= 1e-15
    assert abs(eval_M(M, 0.0, 1) - 0.6) <= 1e-15
    rep = check_matrix_positivity(M, [-1.0])
    assert rep.min_determinant > 0
    d = measure_domination_constant(psi_step(5.0), M, [4.9])
    assert math.isfinite(d.c_meas) and d.c_meas > 0
    beyond = measure_domination_constant(psi_step(5.0), M, [6.0, 7.0])
    assert beyond.c_meas == 0.0


def test_single_exponential_has_zero_determinant():
    # a unit-width step puts its only atom at radius 1, next to the head term
    M = build_correcting_factor(psi_step(1.0, 1.0))
    x = np.linspace(-5, 0, 11)
    det = eval_M(M, x) * eval_M(M, x, 2) - eval_M(M, x, 1) ** 2
    assert np.abs(det).max() <= 1e-15


def test_eval_rejects_positive_and_bad_order(exp_M):
    with pytest.raises(ValueError):
        eval_M(exp_M, 0.1)
    with pytest.raises(ValueError):
        eval_M(exp_M, -1.0, 3)


def test_underflow_clamps_to_zero(exp_M):
    assert eval_M(exp_M, -1e9) == 0.0


def test_phi_examples(rng):
    s = rng.random(1000)
    assert np.abs(phi(psi_exponential(), s) - s**4).max() <= 1e-15
    assert phi(psi_power(), 1.0) == psi_power().psi0
    assert phi(psi_power(), 0.0) == 0.0
    psi = psi_iterated_log(1, 1.0)
    assert phi(psi, math.exp(-5)) == pytest.approx(math.exp(-10) * float(psi(10.0)), rel=1e-14)
    assert float(psi(10.0)) == pytest.approx(1 / (10 * math.log(10) ** 2), rel=1e-14)
    with pytest.raises(ValueError):
        phi(psi, 1.5)
    assert PhiMajorant(psi).check()


def test_phi_consistency(rng):
    s = rng.random(1000) * 0.999 + 1e-3
    for psi in psi_family().values():
        x = np.log(s**-2.0)
        assert np.abs(phi(psi, s) / s**2 - psi(x)).max() <= 1e-12


@pytest.mark.parametrize("spec", [
    {"kind": "table", "xs": [0, 1, 2], "values": [0.1, 0.5, 1.0]},
    {"kind": "power", "power": 1.0},
    {"kind": "power", "power": 0.5},
    {"kind": "exp", "rate": -1},
    {"kind": "nope"},
])
def test_invalid_profiles(spec):
    with pytest.raises(PsiValidationError):
        validate_psi(make_psi(spec))


def test_integrability_check_distinguishes_tails():
    assert check_psi(psi_power(1.5)).integrable
    assert check_psi(psi_iterated_log(2, 0.5)).integrable


def test_moment_weighted_variant_bounded():
    psi = psi_power(2.0)
    x = np.linspace(0, 1e4, 10001)
    plain = measure_domination_constant(psi, build_correcting_factor(psi), x).c_meas
    weighted = measure_domination_constant(psi, build_correcting_factor(psi, moment_weighted=True), x).c_meas
    assert weighted < 10 < plain
