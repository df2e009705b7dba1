import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wbkin.se3 import (
    BranchAmbiguityError,
    Pose,
    adjoint,
    euler_zxy,
    geodesic_distance,
    matrix_to_quat,
    pose_diff,
    pose_oplus,
    quat_to_matrix,
    rot_x,
    rot_y,
    rot_z,
    sample_in_ball,
    sample_uniform_rotation,
    se3_exp,
    se3_left_jacobian_inv,
    se3_log,
    so3_exp,
    so3_left_jacobian,
    so3_left_jacobian_inv,
    so3_log,
)

import oracles

finite = st.floats(-2.0, 2.0, allow_nan=False)
vec3 = st.tuples(finite, finite, finite).map(np.array)


def random_pose(rng):
    return Pose(sample_uniform_rotation(rng), rng.uniform(-2, 2, 3))


def test_so3_exp_examples():
    assert np.array_equal(so3_exp(np.zeros(3)), np.eye(3))
    R = so3_exp([0, 0, np.pi / 2])
    assert np.allclose(R @ [1, 0, 0], [0, 1, 0], atol=1e-15)
    w = np.array([0.3, -0.2, 0.1])
    assert np.allclose(so3_log(so3_exp(w)), w, atol=1e-12)


def test_so3_log_examples():
    assert np.array_equal(so3_log(np.eye(3)), np.zeros(3))
    assert np.allclose(so3_log(rot_z(0.18)), [0, 0, 0.18], atol=1e-15)


@pytest.mark.parametrize("axis", [[1, 0, 0], [0, -1, 0], [0, 0, -1], [1, -1, 0], [-1, 2, -2]])
def test_so3_log_at_pi_sign_rule(axis):
    a = np.array(axis, dtype=float)
    a /= np.linalg.norm(a)
    w = so3_log(so3_exp(np.pi * a))
    assert np.isclose(np.linalg.norm(w), np.pi)
    first = w[np.flatnonzero(np.abs(w) > 1e-9)[0]]
    assert first > 0
    assert np.allclose(np.abs(w), np.pi * np.abs(a), atol=1e-7)


def test_so3_log_near_pi_keeps_sign():
    a = np.array([0.2, -0.5, 0.8])
    a /= np.linalg.norm(a)
    for angle in (np.pi - 1e-3, np.pi - 1e-6, 3.0):
        assert np.allclose(so3_log(so3_exp(angle * a)), angle * a, atol=1e-9)


def test_small_angle_log_is_accurate():
    for theta in (1e-12, 1e-9, 1e-7, 1e-4, 0.1, 0.19, 0.21):
        w = theta * np.array([0.6, 0.0, 0.8])
        assert np.allclose(so3_log(so3_exp(w)), w, rtol=1e-10, atol=1e-20)


def test_se3_exp_examples():
    T = se3_exp(np.zeros(6))
    assert np.array_equal(T.as_matrix(), np.eye(4))
    T = se3_exp([0, 0, 0, 1, 2, 3])
    assert np.array_equal(T.rotation, np.eye(3))
    assert np.allclose(T.translation, [1, 2, 3])


def test_se3_exp_matches_matrix_exponential(rng):
    for _ in range(50):
        xi = np.concatenate([sample_in_ball(rng, 3.0), rng.uniform(-2, 2, 3)])
        assert np.allclose(se3_exp(xi).as_matrix(), oracles.exp6(xi), atol=1e-12)


def test_se3_log_matches_matrix_logarithm(rng):
    for _ in range(50):
        T = random_pose(rng)
        if np.pi - np.linalg.norm(so3_log(T.rotation)) < 1e-2:
            continue
        assert np.allclose(se3_log(T), oracles.log6(T.as_matrix()), atol=1e-9)


def test_se3_log_branch_error():
    T = Pose(rot_x(np.pi), [0.1, 0.2, 0.3])
    with pytest.raises(BranchAmbiguityError):
        se3_log(T)
    xi = se3_log(T, strict=False)
    assert np.allclose(se3_exp(xi).as_matrix(), T.as_matrix(), atol=1e-12)


def test_pose_diff_and_oplus_examples(rng):
    T = random_pose(rng)
    assert np.allclose(pose_diff(T, T), 0, atol=1e-15)
    xi = np.array([0.1, -0.4, 0.3, 0.5, 0.0, -1.0])
    assert np.allclose(pose_diff(T @ se3_exp(xi), T), xi, atol=1e-12)
    assert np.allclose(pose_oplus(T, np.zeros(6)).as_matrix(), T.as_matrix())
    assert np.allclose(pose_oplus(Pose.identity(), xi).as_matrix(), se3_exp(xi).as_matrix())


def test_group_laws(rng):
    for _ in range(100):
        A, B, C = (random_pose(rng) for _ in range(3))
        assert np.allclose(((A @ B) @ C).as_matrix(), (A @ (B @ C)).as_matrix(), atol=1e-9)
        assert np.allclose((A @ A.inverse()).as_matrix(), np.eye(4), atol=1e-9)
        assert np.allclose((A.inverse() @ A).as_matrix(), np.eye(4), atol=1e-9)


def test_geodesic_distance_examples(rng):
    R = sample_uniform_rotation(rng)
    assert geodesic_distance(R, R) < 1e-7
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    assert abs(geodesic_distance(np.eye(3), so3_exp(0.18 * axis)) - 0.18) < 1e-14
    for _ in range(100):
        A, B = sample_uniform_rotation(rng), sample_uniform_rotation(rng)
        assert abs(geodesic_distance(A, B) - geodesic_distance(B, A)) <= 1e-12


def test_quaternion_roundtrip(rng):
    for _ in range(200):
        R = sample_uniform_rotation(rng)
        q = matrix_to_quat(R)
        assert q[0] >= 0 and abs(np.linalg.norm(q) - 1) < 1e-12
        assert np.allclose(quat_to_matrix(q), R, atol=1e-12)


def test_rotation_invariants(rng):
    for _ in range(100):
        R = sample_uniform_rotation(rng)
        assert np.allclose(R.T @ R, np.eye(3), atol=1e-9)
        assert abs(np.linalg.det(R) - 1) < 1e-9


def test_sample_in_ball_volume_fraction():
    rng = np.random.default_rng(0)
    pts = np.array([sample_in_ball(rng, 1.0) for _ in range(100_000)])
    r = np.linalg.norm(pts, axis=1)
    assert r.max() <= 1.0
    assert abs((r <= 0.5).mean() - 0.125) < 0.01


def test_sample_in_ball_rejects_bad_radius(rng):
    with pytest.raises(ValueError):
        sample_in_ball(rng, 0.0)


def test_haar_mean_entry():
    rng = np.random.default_rng(1)
    vals = [sample_uniform_rotation(rng)[0, 0] for _ in range(100_000)]
    assert abs(np.mean(vals)) < 0.02


def test_left_jacobian_inverse_pair(rng):
    for theta in (0.0, 1e-5, 0.15, 0.25, 1.0, 3.0):
        w = theta * np.array([0.0, 0.6, 0.8])
        assert np.allclose(so3_left_jacobian(w) @ so3_left_jacobian_inv(w), np.eye(3), atol=1e-12)


def test_se3_left_jacobian_inv_is_log_derivative(rng):
    # d/dh log(exp(h eta) exp(xi)) at h = 0 equals Jl^-1(xi) eta
    h = 1e-6
    for _ in range(20):
        xi = np.concatenate([sample_in_ball(rng, 2.5), rng.uniform(-1, 1, 3)])
        eta = rng.normal(size=6)
        plus = se3_log(se3_exp(h * eta) @ se3_exp(xi))
        minus = se3_log(se3_exp(-h * eta) @ se3_exp(xi))
        assert np.allclose((plus - minus) / (2 * h), se3_left_jacobian_inv(xi) @ eta, atol=1e-6)


def test_adjoint_transports_twists(rng):
    T = random_pose(rng)
    xi = rng.normal(size=6)
    lhs = (T @ se3_exp(xi) @ T.inverse()).as_matrix()
    assert np.allclose(lhs, se3_exp(adjoint(T) @ xi).as_matrix(), atol=1e-12)


def test_euler_zxy_roundtrip():
    y, r, p = 0.7, -0.4, 1.1
    R = rot_z(y) @ rot_x(r) @ rot_y(p)
    assert np.allclose(euler_zxy(R), (y, r, p))


@settings(max_examples=200, deadline=None)
@given(vec3, vec3)
def test_log_exp_roundtrip_property(w, v):
    if np.linalg.norm(w) >= np.pi - 1e-3:
        w = w / np.linalg.norm(w) * (np.pi - 1e-2)
    xi = np.concatenate([w, v])
    assert np.allclose(se3_log(se3_exp(xi)), xi, atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_oplus_inverts_diff_property(seed):
    rng = np.random.default_rng(seed)
    Ta, Tb = random_pose(rng), random_pose(rng)
    if np.pi - geodesic_distance(Ta.rotation, Tb.rotation) < 1e-3:
        return
    assert np.allclose(pose_oplus(Tb, pose_diff(Ta, Tb)).as_matrix(), Ta.as_matrix(), atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_triangle_inequality_property(seed):
    rng = np.random.default_rng(seed)
    A, B, C = (sample_uniform_rotation(rng) for _ in range(3))
    assert geodesic_distance(A, C) <= geodesic_distance(A, B) + geodesic_distance(B, C) + 1e-9
