import itertools

import numpy as np
import pytest

from deltasing.catalog import closed_form_point
from deltasing.errors import InvarianceError
from deltasing.linalg import numerical_rank
from deltasing.mechanism import DELTA_CONSTRAINT_NAMES, random_configuration
from deltasing.symmetry import (
    ELEMENTS,
    IDENTITY,
    R,
    S,
    GroupElement,
    act,
    constraint_mixing_matrix,
    is_free_on,
    labelled_orbit,
    orbit,
    representation,
)


def test_group_laws():
    assert R * R * R == IDENTITY
    assert S * S == IDENTITY
    for g in ELEMENTS:
        assert g * g.inverse == IDENTITY
    assert len(set(ELEMENTS)) == 6


def test_generators_commute():
    # the block permutation and the mirror act on disjoint structure, so they commute
    np.testing.assert_array_equal(representation(R) @ representation(S), representation(S) @ representation(R))


def test_parse_and_str():
    for g in ELEMENTS:
        assert GroupElement.parse(str(g)) == g
    with pytest.raises(ValueError):
        GroupElement.parse("t")


def test_homomorphism_all_pairs():
    for g, h in itertools.product(ELEMENTS, repeat=2):
        np.testing.assert_array_equal(representation(g * h), representation(g) @ representation(h))


def test_signed_permutation():
    for g in ELEMENTS:
        M = representation(g)
        assert set(np.unique(M)) <= {-1.0, 0.0, 1.0}
        assert np.all(np.count_nonzero(M, axis=0) == 1) and np.all(np.count_nonzero(M, axis=1) == 1)
        np.testing.assert_array_equal(M.T @ M, np.eye(15))
        assert abs(round(np.linalg.det(M))) == 1


def test_identity_and_generators():
    np.testing.assert_array_equal(representation(IDENTITY), np.eye(15))
    x = np.arange(15.0)
    y = act(R, x)
    np.testing.assert_array_equal(y[0:9], np.r_[x[3:9], x[0:3]])
    np.testing.assert_array_equal(y[9:], np.r_[x[11:15], x[9:11]])
    z = act(S, x)
    mask = np.ones(15)
    mask[[2, 5, 8, 10, 12, 14]] = -1
    np.testing.assert_array_equal(z, mask * x)


def test_act_cycles(rng):
    x = rng.normal(size=15)
    np.testing.assert_array_equal(act(IDENTITY, x), x)
    np.testing.assert_allclose(act(R, act(R, act(R, x))), x)


def test_images_stay_on_variety(delta, params):
    q1 = closed_form_point("q1", params)
    for g in ELEMENTS:
        assert delta.residual_max(act(g, q1)) <= 1e-9


def test_zero_set_invariance(delta, params, rng):
    for _ in range(50):
        x = random_configuration(params, rng)
        r0 = numerical_rank(delta.constraints.jacobian(x))
        for g in ELEMENTS:
            y = act(g, x)
            assert np.linalg.norm(delta.constraints.evaluate(y)) <= 1e-8
            assert numerical_rank(delta.constraints.jacobian(y)) == r0


def test_orbits(params):
    assert len(orbit([np.zeros(15)])) == 1
    pts = [closed_form_point(l, params) for l in ("q1", "q2", "q3", "q4")]
    assert len(orbit(pts)) == 24
    assert len(orbit([pts[3]])) == 6
    assert len(labelled_orbit(pts[0])) == 6


def test_orbit_is_sorted(params):
    pts = orbit([closed_form_point("q2", params)])
    keys = [tuple(np.round(p, 12)) for p in pts]
    assert keys == sorted(keys)


def test_free_action(catalog):
    assert is_free_on([np.zeros(15)]) == (False, is_free_on([np.zeros(15)])[1])
    free, bad = is_free_on([r.config for r in catalog])
    assert free and not bad
    x = np.zeros(15)
    x[0] = 1.0  # fixed by s
    free, bad = is_free_on([x])
    assert not free and any(g == S for _, g, _ in bad)


def test_mixing_identity(delta):
    A, res = constraint_mixing_matrix(delta, IDENTITY)
    np.testing.assert_allclose(A, np.eye(12), atol=1e-12)
    assert res < 1e-12


def test_mixing_s_diag(delta):
    A, res = constraint_mixing_matrix(delta, S)
    assert res <= 1e-10
    expected = np.ones(12)
    expected[[DELTA_CONSTRAINT_NAMES.index("l3"), DELTA_CONSTRAINT_NAMES.index("l6")]] = -1
    np.testing.assert_allclose(A, np.diag(expected), atol=1e-10)


def test_mixing_r_permutes_spheres(delta):
    A, res = constraint_mixing_matrix(delta, R)
    assert res <= 1e-10
    P = np.round(A[0:3, 0:3])
    np.testing.assert_allclose(A[0:3, 0:3], P, atol=1e-10)
    assert sorted(np.argmax(P, axis=1)) == [0, 1, 2]
    assert not np.array_equal(P, np.eye(3))
    np.testing.assert_allclose(A[3:6, 3:6], P, atol=1e-10)


def test_mixing_rejects_wrong_action(delta, monkeypatch):
    from deltasing import symmetry

    M = np.eye(15)
    M[0, 0] = -1  # negating x1 alone is not a symmetry
    monkeypatch.setattr(symmetry, "_rep", lambda rot, ref: M)
    with pytest.raises(InvarianceError):
        constraint_mixing_matrix(delta, R)


def test_mixing_needs_points(delta):
    with pytest.raises(ValueError):
        constraint_mixing_matrix(delta, R, n_points=10)
