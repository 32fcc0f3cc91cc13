import numpy as np
import pytest

from deltasing.catalog import closed_form_point
from deltasing.errors import ConsistencyError, InputError, ParameterError
from deltasing.linalg import jacobian_fd, numerical_rank
from deltasing.mechanism import (
    DELTA_CONSTRAINT_NAMES,
    ROT_A,
    TILDE,
    VARIABLE_NAMES,
    ParameterSet,
    PlatformPose,
    arm_center,
    build_crank_slider,
    build_delta,
    crank_slider_configuration,
    from_tilde,
    lift_pose,
    normalize_angle,
    pose_of,
    random_pose,
    to_tilde,
)


def test_orders():
    assert VARIABLE_NAMES[:3] == ("x1", "y1", "z1")
    assert VARIABLE_NAMES[9:] == ("ca1", "sa1", "ca2", "sa2", "ca3", "sa3")
    assert DELTA_CONSTRAINT_NAMES[0] == "s1" and DELTA_CONSTRAINT_NAMES[3] == "c1"
    assert DELTA_CONSTRAINT_NAMES[6:] == ("l1", "l2", "l3", "l4", "l5", "l6")


@pytest.mark.parametrize("a,b,d,word", [(1, 1, 2, "a > d"), (-1, 1, 0.5, "a > 0"), (1, 0, 0.5, "b > 0"),
                                         (1, 1, 0, "d > 0"), (1, 1, 1, "a > d")])
def test_parameter_validation(a, b, d, word):
    with pytest.raises(ParameterError, match=word):
        ParameterSet(a, b, d)


def test_parameter_roundtrip(params):
    assert ParameterSet.from_dict(params.as_dict()) == params
    assert params.q == pytest.approx(np.sqrt(9.75))


def test_q1_on_variety(delta, params):
    assert delta.residual_max(closed_form_point("q1", params)) <= 1e-9


def test_trivial_residuals(delta):
    x = np.zeros(15)
    x[9] = 3.0  # ca1 = a, sa1 = 0
    assert delta.constraints.evaluate(x)[3] == 0.0
    x[0] = 5.0  # (x1, y1, z1) = (b, 0, 0)
    assert delta.constraints.evaluate(x)[0] == 0.0


def test_forward_map_is_v1(delta, params):
    x = np.arange(15.0)
    np.testing.assert_allclose(delta.forward(x), [params.d + x[9] + x[0], x[1], x[2] + x[10]])


@pytest.mark.parametrize("variant", ["original", "tilde"])
def test_jacobian_matches_fd(params, rng, variant):
    m = build_delta(params, variant)
    for _ in range(100):
        x = rng.normal(scale=3.0, size=15)
        J = m.constraints.jacobian(x)
        Jfd = jacobian_fd(m.constraints.evaluate, x)
        assert np.max(np.abs(J - Jfd)) <= 1e-6 * max(1.0, np.max(np.abs(J)))


def test_crank_jacobian_matches_fd(rng):
    m = build_crank_slider(1.3, 2.1)
    for _ in range(100):
        x = rng.normal(size=3)
        J = m.constraints.jacobian(x)
        assert np.max(np.abs(J - jacobian_fd(m.constraints.evaluate, x))) <= 1e-6 * max(1.0, np.max(np.abs(J)))


def test_tilde_roundtrip(rng):
    for _ in range(100):
        x = rng.normal(size=15)
        np.testing.assert_allclose(from_tilde(to_tilde(x)), x, atol=1e-14)


def test_tilde_conjugates_constraints(params, rng):
    orig = build_delta(params)
    tilde = build_delta(params, TILDE)
    for _ in range(100):
        x = rng.normal(scale=3.0, size=15)
        np.testing.assert_allclose(np.sort(orig.constraints.evaluate(x)),
                                   np.sort(tilde.constraints.evaluate(to_tilde(x))), atol=1e-12)


def test_tilde_q1_block2(params):
    x = closed_form_point("q1", params)
    xt = to_tilde(x)
    np.testing.assert_allclose(xt[0:3], x[0:3])
    np.testing.assert_allclose(xt[3:6], x[0:3], atol=1e-14)
    np.testing.assert_allclose(ROT_A @ x[3:6], x[0:3], atol=1e-14)


def test_lift_on_variety(params, rng):
    tilde = build_delta(params, TILDE)
    for _ in range(100):
        pose = random_pose(params, rng)
        x = lift_pose(params, pose)
        assert tilde.residual_max(x) <= 1e-10 * params.b**2
        back = pose_of(params, x)
        np.testing.assert_allclose(back.p, pose.p, atol=1e-12)
        err = [abs(normalize_angle(u - v)) for u, v in zip(back.psi, pose.psi)]
        assert max(err) <= 1e-10


def test_lift_off_sphere(params, rng):
    tilde = build_delta(params, TILDE)
    pose = random_pose(params, rng)
    m1 = arm_center(params, 1, pose.psi[0])
    u = (pose.p - m1) / np.linalg.norm(pose.p - m1)
    moved = PlatformPose(m1 + (params.b + 1) * u, pose.psi)
    res = tilde.constraints.evaluate(lift_pose(params, moved))
    assert res[0] == pytest.approx((params.b + 1) ** 2 - params.b**2)


def test_perturbation_hits_one_sphere(params, rng):
    tilde = build_delta(params, TILDE)
    pose = random_pose(params, rng)
    eps = 1e-7
    m1 = arm_center(params, 1, pose.psi[0])
    n = np.cross(pose.p - arm_center(params, 2, pose.psi[1]), pose.p - arm_center(params, 3, pose.psi[2]))
    n /= np.linalg.norm(n)  # tangent to spheres 2 and 3
    moved = PlatformPose(pose.p + eps * n, pose.psi)
    res = tilde.constraints.evaluate(lift_pose(params, moved))
    expected = 2 * (pose.p - m1) @ n * eps
    assert res[0] == pytest.approx(expected, rel=1e-5)
    assert np.all(np.abs(res[1:3]) < 1e-12)


def test_lift_q4_table_pose(params):
    a, b, d, q = params.a, params.b, params.d, params.q
    x = closed_form_point("q4", params)
    pose = pose_of(params, to_tilde(x))
    np.testing.assert_allclose(pose.p, [2 * b * d / q, 0.0, params.apex * (1 + b / q)], atol=1e-12)
    np.testing.assert_allclose(lift_pose(params, pose), to_tilde(x), atol=1e-12)


def test_pose_q1_angle(params):
    pose = pose_of(params, to_tilde(closed_form_point("q1", params)))
    phi = np.pi - np.arctan(params.apex / params.d)
    np.testing.assert_allclose(pose.psi, [phi] * 3, atol=1e-14)


def test_pose_off_variety(params):
    with pytest.raises(ConsistencyError):
        pose_of(params, np.ones(15))


def test_arm_centers(params):
    np.testing.assert_allclose(arm_center(params, 3, 0.0), [params.d + params.a, 0, 0])
    psi = np.arctan2(params.apex, -params.d)
    for limb in (1, 2, 3):
        np.testing.assert_allclose(arm_center(params, limb, psi), [0, 0, params.apex], atol=1e-14)
    with pytest.raises(InputError):
        arm_center(params, 4, 0.0)


def test_arm_midpoint_matches_table(params):
    a, d = params.a, params.d
    for t in np.linspace(-2, 2, 9):
        mid = 0.5 * (arm_center(params, 1, t) + arm_center(params, 2, t))
        np.testing.assert_allclose(mid, [-(d + a * np.cos(t)) / 2, 0, a * np.sin(t)], atol=1e-14)


def test_normalize_angle():
    assert normalize_angle(-np.pi) == np.pi
    assert normalize_angle(3 * np.pi) == pytest.approx(np.pi)
    assert normalize_angle(0.5) == pytest.approx(0.5)


def test_crank_slider_basics():
    m = build_crank_slider(1.0, 1.0)
    assert m.constraints.evaluate([1.0, 0.0, 7.0])[0] == 0.0
    assert m.constraints.evaluate([0.0, 1.0, 0.0])[1] == 0.0
    J = m.constraints.jacobian([0.0, 1.0, 0.0])
    np.testing.assert_allclose(J, [[0, 2, 0], [0, 2, 0]])
    assert numerical_rank(J) == 1
    with pytest.raises(ParameterError):
        build_crank_slider(0.0, 1.0)


def test_crank_slider_configuration():
    m = build_crank_slider(1.0, 2.0)
    for theta in np.linspace(0, 2 * np.pi, 13):
        assert m.residual_max(crank_slider_configuration(1.0, 2.0, theta)) < 1e-14


def test_bad_variant(params):
    with pytest.raises(InputError):
        build_delta(params, "rotated")
