import math

import numpy as np
import pytest

from hardylab.correcting import psi_exponential
from hardylab.disk_core import (PolyVecField, ScalarPoly, build_boundary_quadrature,
                                build_disk_quadrature, wirtinger_fd)
from hardylab.embedding import (NotSubunitaryError, SizeConditionError, Workspace, carleson_box_norm,
                                weighted_section_checks, curvature_measure_check, inner,
                                subharmonic_weight_check, subharmonic_weight_for_field, bundle_section_check,
                                section_derivatives, size_condition, two_branch_d_norm2,
                                two_branch_dbar_norm2, weighted_d_norm2, weighted_dbar_norm2)
from hardylab.projection import random_field

E1 = PolyVecField([[1], [0]])


def test_constant_u_gives_trivial_chain(exp_M):
    rep = subharmonic_weight_check(lambda z: np.zeros(z.shape), lambda z: np.zeros(z.shape), exp_M,
                        lambda z: np.ones(z.shape))
    assert rep.lhs == 0.0 and rep.mid == rep.rhs == pytest.approx(1.0, abs=1e-14)


def test_zero_h_gives_zeros(exp_M, demo_f, demo_ws):
    rep = subharmonic_weight_for_field(demo_f, exp_M, PolyVecField([[0], [0]]), demo_ws)
    assert rep.lhs == rep.mid == rep.rhs == 0.0


def test_subunitary_required(exp_M):
    with pytest.raises(NotSubunitaryError):
        subharmonic_weight_check(lambda z: np.ones(z.shape), lambda z: np.zeros(z.shape), exp_M,
                      lambda z: np.ones(z.shape))


def test_demo_weighted_embeddings(exp_M, demo_f, demo_ws):
    one_z = PolyVecField([[1, 0], [0, 1]]).scaled(1 / math.sqrt(2))
    assert subharmonic_weight_for_field(one_z, exp_M, E1).margin >= 0
    rep = bundle_section_check(demo_f, exp_M, E1, demo_ws)
    assert rep.margin >= -1e-8 and rep.mid <= rep.rhs + 1e-15
    zero = bundle_section_check(demo_f, exp_M, PolyVecField([[0], [0]]), demo_ws)
    assert zero.lhs == zero.mid == zero.rhs == 0.0


def test_curvature_measure():
    one_z = PolyVecField([[1, 0], [0, 1]]).scaled(1 / math.sqrt(2))
    psi = psi_exponential()
    rep = curvature_measure_check(one_z, psi)
    mass = rep.extras["measure_mass"]
    assert 0 < mass <= 1 and rep.margin >= 0
    fine = curvature_measure_check(one_z, psi, ws=Workspace.build(
        one_z, build_disk_quadrature(128, 512), build_boundary_quadrature(4096)))
    assert abs(fine.extras["measure_mass"] - mass) / mass < 1e-6
    const = curvature_measure_check(PolyVecField([[0.5], [0.5]]), psi)
    assert const.extras["measure_mass"] == 0.0


def test_xi_section_derivatives(rng, demo_f):
    p = PolyVecField(rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3)))
    z = 0.4 - 0.3j
    s, ds, dbs = section_derivatives(demo_f, "xi", p, z)
    fd_d, fd_db = wirtinger_fd(lambda w: section_derivatives(demo_f, "xi", p, w)[0], z, 1e-4)
    assert np.abs(fd_d - ds).max() <= 1e-6 and np.abs(fd_db - dbs).max() <= 1e-6
    for w in 0.9 * np.sqrt(rng.random(1000)) * np.exp(2j * np.pi * rng.random(1000)):
        s, ds, _ = section_derivatives(demo_f, "xi", p, w)
        assert abs(inner(ds, s)) <= 1e-12 * max(1.0, float(np.vdot(s, s).real))
    s, ds, _ = section_derivatives(PolyVecField([[1], [1j]]), "xi", PolyVecField([[2], [3]]), 0.3)
    assert np.abs(ds).max() == 0.0


def test_zeta_section_derivatives(rng, demo_f):
    p = PolyVecField(rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3)))
    z = -0.2 + 0.5j
    _, ds, dbs = section_derivatives(demo_f, "zeta", p, z)
    fd_d, fd_db = wirtinger_fd(lambda w: section_derivatives(demo_f, "zeta", p, w)[0], z, 1e-4)
    assert np.abs(fd_d - ds).max() <= 1e-6 and np.abs(fd_db - dbs).max() <= 1e-6


def test_weighted_norm_examples(demo_f):
    p = PolyVecField([[1, 0.3], [0.2j, 1]])
    z = 0.3 + 0.1j
    _, _, dbs = section_derivatives(demo_f, "xi", p, z)
    c = 0.7 - 0.2j
    assert weighted_dbar_norm2(ScalarPoly([c]), demo_f, p, z) == pytest.approx(
        abs(c) * float(np.vdot(dbs, dbs).real), rel=1e-14)
    # constant field, constant p: dbar xi = 0, so only the |tau'|^2/(4|tau|) term survives
    fc = PolyVecField([[1], [1]]).scaled(1 / math.sqrt(2))
    pc = PolyVecField([[1], [2]])
    s, _, _ = section_derivatives(fc, "xi", pc, z)
    val = weighted_dbar_norm2(ScalarPoly([0, 0, 1]), fc, pc, z)
    assert val == pytest.approx(float(np.vdot(s, s).real), rel=1e-14)
    assert weighted_dbar_norm2(ScalarPoly([0, 0, 1]), fc, pc, 0.0) is None


def test_branch_freedom(rng):
    for _ in range(100):
        f = random_field(rng, 3, 3)
        tau = ScalarPoly(rng.standard_normal(3) + 1j * rng.standard_normal(3))
        p = PolyVecField(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
        z = complex(0.9 * rng.random() * np.exp(2j * np.pi * rng.random()))
        if abs(tau(z)) < 1e-6 or f.norm2(z) < 1e-6:
            continue
        for val, pair in ((weighted_dbar_norm2(tau, f, p, z), two_branch_dbar_norm2(tau, f, p, z)),
                          (weighted_d_norm2(tau, f, p, z), two_branch_d_norm2(tau, f, p, z))):
            assert abs(pair[0] - pair[1]) <= 1e-12 * max(1, pair[0])
            assert abs(val - pair[0]) <= 1e-12 * max(1, pair[0])


def test_size_condition_examples(demo_f, demo_t):
    psi = psi_exponential()
    q = build_disk_quadrature().nodes
    chk = size_condition(demo_f, demo_t, psi, q)
    assert chk.passed and chk.margin >= -1e-10 and abs(abs(chk.z) - 1) < 1e-12
    zero = size_condition(demo_f, ScalarPoly([0]), psi, q)
    assert zero.margin >= 0
    small = PolyVecField([[0.05, 0.1], [0.05, 0]])
    bad = size_condition(small, ScalarPoly([1]), psi, q)
    assert not bad.passed
    with pytest.raises(NotSubunitaryError):
        size_condition(PolyVecField([[2], [0]]), demo_t, psi)
    # scaling tau down never breaks a passing margin
    for c in (0.9, 0.5, 0.1):
        assert size_condition(demo_f, demo_t.scaled(c), psi, q).margin >= chk.margin


def test_weighted_sections_demo(demo_f, demo_t, demo_ws):
    reps = weighted_section_checks(demo_f, demo_t, psi_exponential(), E1, E1, ws=demo_ws)
    assert set(reps) == {"xi_curvature", "xi_sqrt_dbar", "zeta_curvature", "zeta_sqrt_d"}
    assert all(r.margin >= -1e-8 for r in reps.values())
    d = reps["xi_sqrt_dbar"].to_dict()
    assert d["quadrature"] == {"N_r": 64, "N_theta": 256, "N_b": 2048}
    assert {"inequality_id", "lhs", "rhs", "margin", "excluded_nodes"} <= set(d)


def test_weighted_sections_zero_tau_and_zero_section(demo_f, demo_ws):
    reps = weighted_section_checks(demo_f, ScalarPoly([0]), psi_exponential(), E1, E1, ws=demo_ws)
    assert all(r.lhs == 0.0 for r in reps.values())
    zero = PolyVecField([[0], [0]])
    reps = weighted_section_checks(demo_f, ScalarPoly([0, 0, 1]), psi_exponential(), zero, zero, ws=demo_ws)
    assert all(r.passed() for r in reps.values())


def test_weighted_sections_gate_raises(demo_f, demo_ws):
    with pytest.raises(SizeConditionError) as info:
        weighted_section_checks(demo_f, ScalarPoly([0, 0, 2]), psi_exponential(), E1, E1, ws=demo_ws)
    assert info.value.margin < 0


def test_reflection_invariance(rng):
    """Reflecting all data through z -> conj(z) leaves the zeta-side integrals unchanged."""
    f = random_field(rng, 2, 2)
    tau = ScalarPoly([0.1, 0.05j])
    p = PolyVecField(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
    ws = Workspace.build(f)
    wsr = Workspace.build(f.reflected())
    a = weighted_section_checks(f, tau, None, p, p, ws=ws, gate=False)
    b = weighted_section_checks(f.reflected(), tau.reflected(), None, p.reflected(), p.reflected(),
                           ws=wsr, gate=False)
    assert abs(a["zeta_curvature"].lhs - b["zeta_curvature"].lhs) <= 1e-8
    assert abs(a["zeta_sqrt_d"].lhs - b["zeta_sqrt_d"].lhs) <= 1e-8


def test_carleson_box_norm_examples():
    assert carleson_box_norm([0j], [0.7]) == pytest.approx(0.7)
    ring = 0.5 * np.exp(2j * np.pi * np.arange(256) / 256)
    val = carleson_box_norm(ring, np.full(256, 1 / 256))
    assert 1.0 <= val <= 2.0
    assert carleson_box_norm([], []) == 0.0
    with pytest.raises(ValueError):
        carleson_box_norm([1.0 + 0j], [1.0])
