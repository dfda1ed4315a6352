import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardylab.disk_core import PolyVecField, wirtinger_fd
from hardylab.projection import (VanishingFiberError, curvature, curvature_vs_laplacian,
                                 laplacian_projection_fd, node_geometry, opnorm,
                                 pdp_identity_residuals, projection, projection_matrix,
                                 random_field)

ONE_Z = PolyVecField([[1, 0], [0, 1]]).scaled(1 / math.sqrt(2))


def test_projection_at_origin():
    s = projection(ONE_Z, 0.0)
    assert np.allclose(s.Pi, [[1, 0], [0, 0]], atol=1e-15)
    assert np.allclose(s.dPi, [[0, 0], [1, 0]], atol=1e-15)
    assert np.allclose(s.dbarPi, s.dPi.conj().T)


def test_dPi_matches_finite_differences():
    z = 0.3 + 0.2j
    d, _ = wirtinger_fd(lambda w: projection_matrix(ONE_Z, w), z, 1e-4)
    assert np.abs(d - projection(ONE_Z, z).dPi).max() <= 1e-7


def test_projection_fixes_f(rng):
    f = random_field(rng, 3, 4)
    for z in 0.8 * rng.random(20) * np.exp(2j * np.pi * rng.random(20)):
        assert np.abs(projection(f, z).Pi @ f(z) - f(z)).max() <= 1e-12


@pytest.mark.parametrize("z", [0.0, 0.5, 0.5j, 0.3 - 0.4j])
def test_curvature_closed_form(z):
    assert abs(curvature(ONE_Z, z) - 1 / (1 + abs(z) ** 2) ** 2) <= 1e-14


def test_constant_field_has_no_curvature():
    f = PolyVecField([[1], [2j]])
    assert curvature(f, 0.3) == 0.0
    assert curvature_vs_laplacian(f, 0.3, 1e-4) == 0.0


def test_vanishing_fiber():
    f = PolyVecField([[0, 1], [0, 2]])
    with pytest.raises(VanishingFiberError) as info:
        projection(f, 0.0)
    assert info.value.z == 0
    with pytest.raises(VanishingFiberError):
        curvature_vs_laplacian(f, 1e-10, 1e-4)


def test_identity_residuals_sample():
    z = 0.3 + 0.2j
    s = projection(ONE_Z, z)
    res = pdp_identity_residuals(s, laplacian_projection_fd(ONE_Z, z, 1e-4))
    assert res["Pi_dPi"] <= 1e-12 and res["dPi_Q"] <= 1e-12
    assert res["laplacian"] <= 1e-6
    assert all(v <= 1e-12 for k, v in res.items() if k != "laplacian")


def test_curvature_vs_laplacian_examples(rng):
    assert curvature_vs_laplacian(ONE_Z, 0.4, 1e-4) <= 1e-6
    # n = 3, degree 3, constant term dominant: no zeros in the disk
    c = np.zeros((3, 4), dtype=complex)
    c[:, 0] = [1.0, 0.5, 0.2]
    c[:, 1:] = 0.1 * (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    f = PolyVecField(c)
    for z in 0.85 * np.sqrt(rng.random(10)) * np.exp(2j * np.pi * rng.random(10)):
        assert curvature_vs_laplacian(f, z, 1e-4) <= 1e-5


def test_frobenius_equals_spectral_for_rank_one(rng):
    f = random_field(rng, 4, 5)
    z = 0.5 * np.exp(2j * np.pi * rng.random(200))
    g = node_geometry(f, z)
    frob = np.sqrt(np.sum(np.abs(g.dPi) ** 2, axis=(1, 2)))
    assert np.abs(frob - opnorm(g.dPi)).max() <= 1e-12
    assert np.abs(frob**2 - g.curvature).max() <= 1e-12


def test_excluded_nodes_are_flagged():
    f = PolyVecField([[0, 1], [0, 1]])
    g = node_geometry(f, np.array([0.0, 0.5]))
    assert list(g.valid) == [False, True]


coeff = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.lists(coeff, min_size=3, max_size=3), min_size=2, max_size=4),
       st.floats(0, 0.9), st.floats(0, 2 * math.pi),
       coeff.filter(lambda c: abs(c) > 1e-3))
def test_curvature_nonnegative_and_gauge_invariant(rows, r, t, c):
    f = PolyVecField(rows)
    z = r * complex(math.cos(t), math.sin(t))
    if f.norm2(z) < 1e-6:
        return
    k = curvature(f, z)
    assert k >= 0.0
    assert abs(curvature(f.scaled(c), z) - k) <= 1e-12 * max(1.0, k)
    assert np.abs(projection(f.scaled(c), z).Pi - projection(f, z).Pi).max() <= 1e-12
