"""Feasibility-guided reward terms and their weighted total.

Every term is returned as a non-negative magnitude; penalties get their sign
from the weight. Tracking terms decay as exp(-error) so that they equal 1 at
zero error. Set ``literal_exponents=True`` to use exp(+error) instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields

import numpy as np

from .ik import IkResult
from .model import RobotModel, count_near_limit, pose_from_record, pose_to_record
from .se3 import Pose, pose_diff

N_JOINTS = 18
N_LEG_JOINTS = 12
N_ARM_JOINTS = 6
N_FEET = 4
KINEMATICS_FLOOR = 0.2

TERMS = (
    "kinematics",
    "linear_velocity",
    "angular_velocity",
    "pose_tracking",
    "torque",
    "torque_smooth",
    "joint_acceleration",
    "joint_limit",
    "collision",
    "clearance",
    "lift_time",
    "slip",
)


@dataclass(frozen=True)
class RewardWeights:
    kinematics: float = 0.16
    linear_velocity: float = 0.5
    angular_velocity: float = 0.3
    pose_tracking: float = 0.6
    torque: float = -1.2e-5
    torque_smooth: float = -1.5e-6
    joint_acceleration: float = -1.0e-7
    joint_limit: float = -0.1
    collision: float = -0.4
    clearance: float = 3.0
    lift_time: float = 0.35
    slip: float = -0.15

    def scaled(self, factor: float) -> RewardWeights:
        return RewardWeights(**{f.name: getattr(self, f.name) * factor for f in fields(self)})

    @classmethod
    def from_mapping(cls, mapping: dict) -> RewardWeights:
        unknown = set(mapping) - set(TERMS)
        if unknown:
            raise ValueError(f"unknown reward terms {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in mapping.items()})


def _vec(value, n: int, name: str) -> np.ndarray:
    arr = np.array(value, dtype=float).reshape(-1)
    if arr.shape != (n,):
        raise ValueError(f"{name} must have length {n}, got {arr.size}")
    return arr


@dataclass(frozen=True, eq=False)
class RobotSnapshot:
    """One control step of the legged manipulator.

    Joint vectors hold 12 leg joints followed by 6 arm joints. ``body_rotation``,
    ``body_twist`` and ``last_action`` are only read by the observation builders.
    """

    cmd_linear_velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    cmd_angular_velocity: float = 0.0
    measured_linear_velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    measured_angular_velocity: float = 0.0
    cmd_pose: Pose = field(default_factory=Pose.identity)
    ee_pose: Pose = field(default_factory=Pose.identity)
    joint_q: np.ndarray = field(default_factory=lambda: np.zeros(N_JOINTS))
    joint_qd: np.ndarray = field(default_factory=lambda: np.zeros(N_JOINTS))
    joint_qdd: np.ndarray = field(default_factory=lambda: np.zeros(N_JOINTS))
    joint_torque: np.ndarray = field(default_factory=lambda: np.zeros(N_JOINTS))
    joint_torque_rate: np.ndarray = field(default_factory=lambda: np.zeros(N_JOINTS))
    collision_count: int = 0
    foot_clearance: np.ndarray = field(default_factory=lambda: np.zeros(N_FEET))
    foot_lift_time: np.ndarray = field(default_factory=lambda: np.zeros(N_FEET))
    foot_slip: np.ndarray = field(default_factory=lambda: np.zeros(N_FEET))
    ik_result: IkResult = field(default_factory=lambda: IkResult(np.zeros(N_ARM_JOINTS), False, 0, float("nan")))
    arm_q_measured: np.ndarray = field(default_factory=lambda: np.zeros(N_ARM_JOINTS))
    body_rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    body_twist: np.ndarray = field(default_factory=lambda: np.zeros(6))
    last_action: np.ndarray = field(default_factory=lambda: np.zeros(N_JOINTS))

    def __post_init__(self):
        sizes = {
            "cmd_linear_velocity": 3,
            "measured_linear_velocity": 3,
            "joint_q": N_JOINTS,
            "joint_qd": N_JOINTS,
            "joint_qdd": N_JOINTS,
            "joint_torque": N_JOINTS,
            "joint_torque_rate": N_JOINTS,
            "foot_clearance": N_FEET,
            "foot_lift_time": N_FEET,
            "foot_slip": N_FEET,
            "arm_q_measured": N_ARM_JOINTS,
            "body_twist": 6,
            "last_action": N_JOINTS,
        }
        for name, n in sizes.items():
            object.__setattr__(self, name, _vec(getattr(self, name), n, name))
        object.__setattr__(self, "body_rotation", np.array(self.body_rotation, dtype=float).reshape(3, 3))
        object.__setattr__(self, "cmd_angular_velocity", float(self.cmd_angular_velocity))
        object.__setattr__(self, "measured_angular_velocity", float(self.measured_angular_velocity))
        if int(self.collision_count) != self.collision_count or self.collision_count < 0:
            raise ValueError(f"collision_count must be a non-negative integer, got {self.collision_count}")
        object.__setattr__(self, "collision_count", int(self.collision_count))


@dataclass(frozen=True)
class RewardBreakdown:
    terms: dict
    weighted: dict
    total: float


def _decay(error: float, literal: bool) -> float:
    return float(np.exp(error if literal else -error))


def feasible_state_reward(ik: IkResult, arm_q_measured, literal_exponents: bool = False) -> float:
    """Zero unless IK succeeded; otherwise exp(-sum|q_ideal - q|) floored at 0.2."""
    q_ideal = np.asarray(ik.q, dtype=float)
    q_meas = np.asarray(arm_q_measured, dtype=float)
    if q_ideal.shape != q_meas.shape:
        raise ValueError(f"ik.q has shape {q_ideal.shape}, arm_q_measured {q_meas.shape}")
    if not ik.feasible:
        return 0.0
    return max(_decay(float(np.sum(np.abs(q_ideal - q_meas))), literal_exponents), KINEMATICS_FLOOR)


def task_rewards(s: RobotSnapshot, literal_exponents: bool = False) -> dict:
    lin_err = float(np.linalg.norm(s.cmd_linear_velocity - s.measured_linear_velocity))
    ang_err = (s.cmd_angular_velocity - s.measured_angular_velocity) ** 2
    pose_err = float(np.linalg.norm(pose_diff(s.cmd_pose, s.ee_pose)))
    return {
        "linear_velocity": _decay(lin_err, literal_exponents),
        "angular_velocity": _decay(ang_err, literal_exponents),
        "pose_tracking": _decay(pose_err, literal_exponents),
    }


def regularization_rewards(s: RobotSnapshot, model: RobotModel | None = None, leg_limits=None) -> dict:
    """Penalty and shaping magnitudes.

    The joint-limit count covers the arm joints against ``model`` limits, plus
    the leg joints when ``leg_limits`` (12 x 2) is given.
    """
    joint_limit = 0
    if model is not None:
        joint_limit += count_near_limit(model, s.joint_q[N_LEG_JOINTS:])
    if leg_limits is not None:
        L = np.asarray(leg_limits, dtype=float).reshape(N_LEG_JOINTS, 2)
        mid, half = L.mean(axis=1), 0.5 * (L[:, 1] - L[:, 0])
        joint_limit += int(np.sum(np.abs(s.joint_q[:N_LEG_JOINTS] - mid) > 0.96 * half))
    return {
        "torque": float(np.sum(s.joint_torque**2)),
        "torque_smooth": float(np.sqrt(np.sum(s.joint_torque_rate**2))),
        "joint_acceleration": float(np.sum(s.joint_qdd**2)),
        "joint_limit": float(joint_limit),
        "collision": float(s.collision_count),
        "clearance": float(np.sum(s.foot_clearance)),
        "lift_time": float(np.sum(s.foot_lift_time)),
        "slip": float(np.sum(s.foot_slip)),
    }


def total_reward(
    s: RobotSnapshot,
    weights: RewardWeights | None = None,
    model: RobotModel | None = None,
    literal_exponents: bool = False,
    leg_limits=None,
) -> RewardBreakdown:
    weights = weights or RewardWeights()
    terms = {"kinematics": feasible_state_reward(s.ik_result, s.arm_q_measured, literal_exponents)}
    terms.update(task_rewards(s, literal_exponents))
    terms.update(regularization_rewards(s, model, leg_limits))
    weighted = {name: getattr(weights, name) * terms[name] for name in TERMS}
    total = 0.0
    for name in TERMS:
        total += weighted[name]
    return RewardBreakdown({name: terms[name] for name in TERMS}, weighted, total)


# Snapshot log records.

_VECTOR_FIELDS = (
    "cmd_linear_velocity",
    "measured_linear_velocity",
    "joint_q",
    "joint_qd",
    "joint_qdd",
    "joint_torque",
    "joint_torque_rate",
    "foot_clearance",
    "foot_lift_time",
    "foot_slip",
    "arm_q_measured",
    "body_twist",
    "last_action",
)
_SNAPSHOT_FIELDS = {f.name for f in fields(RobotSnapshot)}


def snapshot_to_record(s: RobotSnapshot) -> dict:
    rec = {name: getattr(s, name).tolist() for name in _VECTOR_FIELDS}
    rec.update(
        cmd_angular_velocity=s.cmd_angular_velocity,
        measured_angular_velocity=s.measured_angular_velocity,
        cmd_pose=pose_to_record(s.cmd_pose),
        ee_pose=pose_to_record(s.ee_pose),
        collision_count=s.collision_count,
        body_rotation=s.body_rotation.tolist(),
        ik_result={
            "q": s.ik_result.q.tolist(),
            "feasible": s.ik_result.feasible,
            "iterations": s.ik_result.iterations,
            "final_error": s.ik_result.final_error,
        },
    )
    return rec


def snapshot_from_record(rec: dict) -> RobotSnapshot:
    """Build a snapshot from a log record; missing fields take their defaults."""
    unknown = set(rec) - _SNAPSHOT_FIELDS
    if unknown:
        raise ValueError(f"unknown snapshot fields {sorted(unknown)}")
    kwargs = dict(rec)
    for name in ("cmd_pose", "ee_pose"):
        if name in kwargs:
            kwargs[name] = pose_from_record(kwargs[name], name)
    if "ik_result" in kwargs:
        ik = kwargs["ik_result"]
        final = ik.get("final_error")
        kwargs["ik_result"] = IkResult(
            np.array(ik["q"], dtype=float),
            bool(ik["feasible"]),
            int(ik.get("iterations", 0)),
            float("nan") if final is None else float(final),
        )
    return RobotSnapshot(**kwargs)


def read_snapshot_log(text: str) -> list[RobotSnapshot]:
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            out.append(snapshot_from_record(json.loads(line)))
        except (ValueError, KeyError, TypeError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return out
