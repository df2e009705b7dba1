import json

import numpy as np
import pytest

from wbkin.ik import IkResult
from wbkin.model import bundled_model_text, parse_model
from wbkin.rewards import (
    TERMS,
    RewardWeights,
    RobotSnapshot,
    feasible_state_reward,
    read_snapshot_log,
    regularization_rewards,
    snapshot_from_record,
    snapshot_to_record,
    task_rewards,
    total_reward,
)
from wbkin.se3 import Pose, rot_x, se3_exp


def feasible(q=np.zeros(6)):
    return IkResult(np.asarray(q, dtype=float), True, 1, 0.0)


def test_default_weights():
    w = RewardWeights()
    assert [getattr(w, t) for t in TERMS] == [
        0.16, 0.5, 0.3, 0.6, -1.2e-5, -1.5e-6, -1.0e-7, -0.1, -0.4, 3.0, 0.35, -0.15,
    ]


def test_feasible_state_reward_examples():
    assert feasible_state_reward(feasible(), np.zeros(6)) == 1.0
    q = np.array([2.0, 2.0, 2.0, 2.0, 1.0, 1.0])
    assert feasible_state_reward(feasible(q), np.zeros(6)) == 0.2
    assert feasible_state_reward(IkResult(np.zeros(6), False, 10, 1.0), np.zeros(6)) == 0.0
    assert np.isclose(feasible_state_reward(feasible([0.5, 0, 0, 0, 0, 0]), np.zeros(6)), np.exp(-0.5))


def test_gate_ignores_joint_values(rng):
    for _ in range(20):
        q = rng.normal(size=6)
        assert feasible_state_reward(IkResult(q, False, 10, 1.0), q) == 0.0


def test_feasible_state_reward_dimension_check():
    with pytest.raises(ValueError):
        feasible_state_reward(feasible(), np.zeros(5))


def test_range(rng):
    for _ in range(200):
        r = feasible_state_reward(feasible(rng.normal(size=6) * 2), np.zeros(6))
        assert 0.2 <= r <= 1.0


def test_literal_exponent_variant():
    q = np.array([2.0, 2.0, 2.0, 2.0, 1.0, 1.0])
    assert np.isclose(feasible_state_reward(feasible(q), np.zeros(6), literal_exponents=True), np.exp(10.0))
    s = RobotSnapshot(cmd_linear_velocity=[1, 0, 0])
    assert np.isclose(task_rewards(s, literal_exponents=True)["linear_velocity"], np.e)


def test_task_reward_examples():
    r = task_rewards(RobotSnapshot())
    assert r == {"linear_velocity": 1.0, "angular_velocity": 1.0, "pose_tracking": 1.0}
    r = task_rewards(RobotSnapshot(cmd_linear_velocity=[0.6, 0.8, 0.0]))
    assert np.isclose(r["linear_velocity"], np.exp(-1.0))
    r = task_rewards(RobotSnapshot(cmd_angular_velocity=0.5, measured_angular_velocity=-0.5))
    assert np.isclose(r["angular_velocity"], np.exp(-1.0))
    T = Pose(rot_x(0.4), [0.1, 0.2, 0.3])
    xi = np.array([0.3, 0.0, 0.0, 0.0, 0.4, 0.0])
    r = task_rewards(RobotSnapshot(cmd_pose=T @ se3_exp(xi), ee_pose=T))
    assert np.isclose(r["pose_tracking"], np.exp(-0.5))


def test_task_rewards_monotone(rng):
    for _ in range(100):
        a, b = sorted(rng.uniform(0, 3, 2))
        ra = task_rewards(RobotSnapshot(cmd_linear_velocity=[a, 0, 0]))["linear_velocity"]
        rb = task_rewards(RobotSnapshot(cmd_linear_velocity=[b, 0, 0]))["linear_velocity"]
        assert ra > rb or a == b


def test_regularization_examples(arm6):
    zero = regularization_rewards(RobotSnapshot())
    assert all(v == 0 for v in zero.values())
    assert regularization_rewards(RobotSnapshot(joint_torque=np.ones(18)))["torque"] == 18.0
    r = regularization_rewards(RobotSnapshot(joint_torque_rate=np.full(18, 2.0)))
    assert np.isclose(r["torque_smooth"], np.sqrt(72.0))
    d = json.loads(bundled_model_text("z1_like"))
    d["joint_limits"] = [[-1.0, 1.0]] * 6
    sym = parse_model(json.dumps(d))
    q = np.zeros(18)
    q[12] = 0.99
    assert regularization_rewards(RobotSnapshot(joint_q=q), sym)["joint_limit"] == 1.0
    legs = np.tile([-1.0, 1.0], (12, 1))
    q[0] = -0.98
    assert regularization_rewards(RobotSnapshot(joint_q=q), sym, leg_limits=legs)["joint_limit"] == 2.0


def test_total_examples():
    perfect = RobotSnapshot(ik_result=feasible())
    assert total_reward(perfect).total == pytest.approx(1.56, abs=1e-12)
    infeasible = RobotSnapshot(ik_result=IkResult(np.zeros(6), False, 10, 1.0))
    assert total_reward(infeasible).total == pytest.approx(1.40, abs=1e-12)
    b = total_reward(RobotSnapshot(collision_count=1))
    assert b.weighted["collision"] == -0.4


def test_breakdown_sums(rng):
    s = RobotSnapshot(
        joint_torque=rng.normal(size=18),
        foot_slip=rng.uniform(size=4),
        foot_lift_time=rng.uniform(size=4),
        ik_result=feasible(rng.normal(size=6) * 0.1),
    )
    b = total_reward(s)
    assert list(b.terms) == list(TERMS)
    assert abs(b.total - sum(b.weighted.values())) <= 1e-12


def test_weights_linearity(rng):
    s = RobotSnapshot(cmd_linear_velocity=rng.normal(size=3), joint_qdd=rng.normal(size=18), ik_result=feasible())
    w = RewardWeights()
    assert abs(total_reward(s, w.scaled(2.0)).total - 2 * total_reward(s, w).total) <= 1e-12


def test_weights_from_mapping():
    w = RewardWeights.from_mapping({"slip": -1.0})
    assert w.slip == -1.0 and w.kinematics == 0.16
    with pytest.raises(ValueError):
        RewardWeights.from_mapping({"pose": 1.0})


def test_snapshot_validation():
    with pytest.raises(ValueError):
        RobotSnapshot(joint_q=np.zeros(17))
    with pytest.raises(ValueError):
        RobotSnapshot(collision_count=-1)
    with pytest.raises(ValueError):
        RobotSnapshot(foot_slip=np.zeros(3))


def test_snapshot_record_roundtrip(rng):
    s = RobotSnapshot(
        cmd_linear_velocity=rng.normal(size=3),
        cmd_pose=Pose(rot_x(0.3), [1, 2, 3]),
        joint_q=rng.normal(size=18),
        collision_count=2,
        ik_result=feasible(rng.normal(size=6)),
    )
    back = snapshot_from_record(json.loads(json.dumps(snapshot_to_record(s))))
    assert np.array_equal(back.joint_q, s.joint_q)
    assert back.ik_result == s.ik_result
    assert np.allclose(back.cmd_pose.as_matrix(), s.cmd_pose.as_matrix())
    assert total_reward(back).total == pytest.approx(total_reward(s).total, abs=1e-12)


def test_snapshot_log_errors():
    with pytest.raises(ValueError, match="line 2"):
        read_snapshot_log('{}\n{"joint_q": [1, 2]}\n')
    with pytest.raises(ValueError, match="unknown"):
        read_snapshot_log('{"speed": 1}\n')
