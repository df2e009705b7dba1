"""Actor and critic observation vectors.

Both layouts are fixed tables of (name, length); offsets are derived from
them and exposed through ``Layout``. The actor sees delayed, noisy
proprioception; the critic sees privileged, noise-free state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .ik import IkResult
from .rewards import RobotSnapshot
from .se3 import Pose, so3_log


@dataclass(frozen=True)
class Layout:
    rows: tuple[tuple[str, int], ...]

    @property
    def size(self) -> int:
        return sum(n for _, n in self.rows)

    @property
    def offsets(self) -> dict[str, int]:
        out, k = {}, 0
        for name, n in self.rows:
            out[name] = k
            k += n
        return out

    def slice(self, name: str) -> slice:
        start = self.offsets[name]
        return slice(start, start + dict(self.rows)[name])

    def table(self) -> list[tuple[str, int, int]]:
        offs = self.offsets
        return [(name, offs[name], n) for name, n in self.rows]


ACTOR_LAYOUT = Layout(
    (
        ("command", 9),
        ("roll_pitch", 2),
        ("joint_position", 18),
        ("joint_velocity", 18),
        ("body_twist", 6),
        ("ee_pose", 6),
        ("last_action", 18),
    )
)

CRITIC_LAYOUT = Layout(
    (
        ("command", 9),
        ("joint_states", 72),
        ("planned_ee_twist", 6),
        ("desired_arm_q", 6),
        ("ik_status", 1),
        ("body_twist", 6),
        ("action_history", 36),
        ("foot_clearance", 4),
        ("foot_period", 4),
        ("foot_position", 12),
        ("foot_slip", 4),
        ("foot_touchdown_impulse", 4),
        ("torso_disturbance", 6),
        ("ee_pose", 6),
        ("ee_twist", 6),
        ("ee_disturbance", 6),
        ("arm_link_masses", 6),
        ("arm_jacobian", 36),
    )
)

ACTOR_DIM = ACTOR_LAYOUT.size
CRITIC_DIM = CRITIC_LAYOUT.size
assert ACTOR_DIM == 77, ACTOR_DIM
assert CRITIC_DIM == 230, CRITIC_DIM


@dataclass(frozen=True)
class NoiseModel:
    """Per-group Gaussian std and an observation delay in control steps."""

    joint_position: float = 0.01
    joint_velocity: float = 0.5
    body_twist: float = 0.05
    ee_pose: float = 0.05
    delay_steps: int = 0

    def __post_init__(self):
        for name in ("joint_position", "joint_velocity", "body_twist", "ee_pose"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} std must be >= 0")
        if self.delay_steps < 0:
            raise ValueError(f"delay_steps must be >= 0, got {self.delay_steps}")

    @classmethod
    def zero(cls, delay_steps: int = 0) -> NoiseModel:
        return cls(0.0, 0.0, 0.0, 0.0, delay_steps)


def pose_coordinates(T: Pose) -> np.ndarray:
    """Position followed by the rotation vector."""
    return np.concatenate([T.translation, so3_log(T.rotation)])


def command_vector(s: RobotSnapshot) -> np.ndarray:
    """(vx, vy, yaw rate) followed by the commanded ee pose coordinates."""
    v = s.cmd_linear_velocity
    return np.concatenate([[v[0], v[1], s.cmd_angular_velocity], pose_coordinates(s.cmd_pose)])


def roll_pitch(R) -> np.ndarray:
    """Roll and pitch of R = Rz(yaw) Ry(pitch) Rx(roll)."""
    R = np.asarray(R, dtype=float)
    return np.array([np.arctan2(R[2, 1], R[2, 2]), np.arcsin(np.clip(-R[2, 0], -1.0, 1.0))])


def build_actor_obs(
    s: RobotSnapshot,
    history: Sequence[RobotSnapshot] = (),
    noise: NoiseModel | None = None,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Actor observation for the current snapshot ``s``.

    ``history`` holds past snapshots oldest first, excluding ``s``; with
    ``delay_steps = d > 0`` proprioception is read from ``history[-d]``.
    Command and last action always come from ``s``. Noise is drawn in layout
    order, one block per noisy group.
    """
    noise = noise or NoiseModel.zero()
    d = noise.delay_steps
    if d > len(history):
        raise ValueError(f"delay of {d} steps needs {d} past snapshots, history has {len(history)}")
    src = s if d == 0 else history[-d]
    rng = rng if rng is not None else np.random.default_rng(0)

    def noisy(x, std):
        x = np.asarray(x, dtype=float)
        return x + rng.normal(0.0, std, x.shape) if std > 0 else x.copy()

    out = np.concatenate(
        [
            command_vector(s),
            roll_pitch(src.body_rotation),
            noisy(src.joint_q, noise.joint_position),
            noisy(src.joint_qd, noise.joint_velocity),
            noisy(src.body_twist, noise.body_twist),
            noisy(pose_coordinates(src.ee_pose), noise.ee_pose),
            s.last_action,
        ]
    )
    assert out.shape == (ACTOR_DIM,)
    return out


def _zeros(n):
    return field(default_factory=lambda: np.zeros(n))


@dataclass(frozen=True, eq=False)
class CriticAux:
    """Privileged inputs that do not live in a ``RobotSnapshot``."""

    joint_states: np.ndarray = _zeros(72)
    planned_ee_twist: np.ndarray = _zeros(6)
    desired_arm_q: np.ndarray = _zeros(6)
    action_history: np.ndarray = _zeros(36)
    foot_period: np.ndarray = _zeros(4)
    foot_position: np.ndarray = _zeros(12)
    foot_touchdown_impulse: np.ndarray = _zeros(4)
    torso_disturbance: np.ndarray = _zeros(6)
    ee_twist: np.ndarray = _zeros(6)
    ee_disturbance: np.ndarray = _zeros(6)
    arm_link_masses: np.ndarray = _zeros(6)
    arm_jacobian: np.ndarray = field(default_factory=lambda: np.zeros((6, 6)))


def joint_states(s: RobotSnapshot) -> np.ndarray:
    """q, qd, qdd and torque stacked into the 72-entry joint-state block."""
    return np.concatenate([s.joint_q, s.joint_qd, s.joint_qdd, s.joint_torque])


def _ik_status(ik: IkResult) -> float:
    return 1.0 if ik.feasible else 0.0


def build_critic_obs(s: RobotSnapshot, aux: CriticAux | None = None) -> np.ndarray:
    """Noise-free critic observation; the jacobian block is row-major."""
    aux = aux or CriticAux()
    values = {
        "command": command_vector(s),
        "joint_states": aux.joint_states,
        "planned_ee_twist": aux.planned_ee_twist,
        "desired_arm_q": aux.desired_arm_q,
        "ik_status": [_ik_status(s.ik_result)],
        "body_twist": s.body_twist,
        "action_history": aux.action_history,
        "foot_clearance": s.foot_clearance,
        "foot_period": aux.foot_period,
        "foot_position": aux.foot_position,
        "foot_slip": s.foot_slip,
        "foot_touchdown_impulse": aux.foot_touchdown_impulse,
        "torso_disturbance": aux.torso_disturbance,
        "ee_pose": pose_coordinates(s.ee_pose),
        "ee_twist": aux.ee_twist,
        "ee_disturbance": aux.ee_disturbance,
        "arm_link_masses": aux.arm_link_masses,
        "arm_jacobian": aux.arm_jacobian,
    }
    parts = []
    for name, n in CRITIC_LAYOUT.rows:
        arr = np.asarray(values[name], dtype=float)
        if arr.size != n:
            raise ValueError(f"critic row {name!r} needs {n} values, got {arr.size} (shape {arr.shape})")
        parts.append(arr.reshape(-1))
    out = np.concatenate(parts)
    assert out.shape == (CRITIC_DIM,)
    return out


def critic_aux_for(s: RobotSnapshot, **kwargs) -> CriticAux:
    """CriticAux with the joint-state block filled from ``s``."""
    kwargs.setdefault("joint_states", joint_states(s))
    return CriticAux(**kwargs)


def observation_record(kind: str, values) -> dict:
    if kind not in ("actor", "critic"):
        raise ValueError(f"kind must be 'actor' or 'critic', got {kind!r}")
    return {"kind": kind, "values": np.asarray(values, dtype=float).tolist()}

