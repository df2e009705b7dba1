"""Product-of-exponentials serial-arm model.

Screw axes are space-frame (arm-base) twists at the zero configuration,
ordered (angular, linear). Forward kinematics is

    T(q) = exp(S_1 q_1) ... exp(S_n q_n) M
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import kernels
from .se3 import Pose, adjoint, quat_to_matrix

AXIS_TOL = 1e-6
QUAT_TOL = 1e-6
DEFAULT_LIMIT_FRACTION = 0.96

_MODEL_KEYS = {"name", "screw_axes", "home_pose", "joint_limits", "mount_in_body"}
_POSE_KEYS = {"position", "quaternion"}

BUNDLED_MODELS = ("planar_2r", "z1_like")


class ModelError(ValueError):
    """Schema or consistency error in a model file; ``path`` names the field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True, eq=False)
class RobotModel:
    name: str
    home_pose: Pose
    screw_axes: np.ndarray  # (n, 6)
    joint_limits: np.ndarray  # (n, 2)
    mount_in_body: Pose

    def __post_init__(self):
        S = np.array(self.screw_axes, dtype=float)
        L = np.array(self.joint_limits, dtype=float)
        if S.ndim != 2 or S.shape[1] != 6 or S.shape[0] < 1:
            raise ModelError("screw_axes", f"expected (n, 6) with n >= 1, got shape {S.shape}")
        if L.shape != (S.shape[0], 2):
            raise ModelError("joint_limits", f"expected shape ({S.shape[0]}, 2), got {L.shape}")
        for i, (lo, hi) in enumerate(L):
            if not lo < hi:
                raise ModelError(f"joint_limits[{i}]", f"q_min {lo} must be < q_max {hi}")
        S = np.array([_normalize_axis(s, f"screw_axes[{i}]") for i, s in enumerate(S)])
        S.flags.writeable = False
        L.flags.writeable = False
        object.__setattr__(self, "screw_axes", S)
        object.__setattr__(self, "joint_limits", L)

    @property
    def dof(self) -> int:
        return self.screw_axes.shape[0]

    @property
    def q_min(self) -> np.ndarray:
        return self.joint_limits[:, 0]

    @property
    def q_max(self) -> np.ndarray:
        return self.joint_limits[:, 1]

    def check_q(self, q, what: str = "q") -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if q.shape != (self.dof,):
            raise ValueError(f"{what} has shape {q.shape}, model {self.name!r} expects ({self.dof},)")
        return q


def _normalize_axis(s, path: str) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    w = np.linalg.norm(s[:3])
    if w > AXIS_TOL:
        return s if w == 1.0 else s / w
    v = np.linalg.norm(s[3:])
    if v > AXIS_TOL:
        out = np.concatenate([np.zeros(3), s[3:] / v])
        return out
    raise ModelError(path, "screw axis has neither angular nor linear direction")


def _parse_pose(obj, path: str) -> Pose:
    if not isinstance(obj, dict):
        raise ModelError(path, "expected an object with position and quaternion")
    extra = set(obj) - _POSE_KEYS
    if extra:
        raise ModelError(path, f"unknown keys {sorted(extra)}")
    missing = _POSE_KEYS - set(obj)
    if missing:
        raise ModelError(path, f"missing keys {sorted(missing)}")
    p = _float_array(obj["position"], f"{path}.position", (3,))
    q = _float_array(obj["quaternion"], f"{path}.quaternion", (4,))
    if abs(np.linalg.norm(q) - 1.0) > QUAT_TOL:
        raise ModelError(f"{path}.quaternion", f"norm {np.linalg.norm(q):.9g} is not 1 within {QUAT_TOL}")
    return Pose(quat_to_matrix(q), p)


def pose_from_record(obj, path: str = "pose") -> Pose:
    """Read a ``{position, quaternion}`` record; quaternion is (w, x, y, z)."""
    return _parse_pose(obj, path)


def pose_to_record(T: Pose) -> dict:
    return {"position": T.translation.tolist(), "quaternion": T.quaternion.tolist()}


def _float_array(value, path: str, shape=None) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ModelError(path, "expected numeric array") from None
    if shape is not None and arr.shape != shape:
        raise ModelError(path, f"expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ModelError(path, "non-finite value")
    return arr


def parse_model(text: str) -> RobotModel:
    """Parse a model file (JSON). Raises ModelError naming the offending field."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError("<root>", f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ModelError("<root>", "expected an object")
    extra = set(data) - _MODEL_KEYS
    if extra:
        raise ModelError("<root>", f"unknown keys {sorted(extra)}")
    missing = _MODEL_KEYS - set(data)
    if missing:
        raise ModelError("<root>", f"missing keys {sorted(missing)}")
    if not isinstance(data["name"], str):
        raise ModelError("name", "expected a string")

    axes = data["screw_axes"]
    if not isinstance(axes, list) or not axes:
        raise ModelError("screw_axes", "expected a non-empty array")
    S = np.array([_float_array(a, f"screw_axes[{i}]", (6,)) for i, a in enumerate(axes)])
    limits = data["joint_limits"]
    if not isinstance(limits, list):
        raise ModelError("joint_limits", "expected an array")
    if len(limits) != len(S):
        raise ModelError("joint_limits", f"{len(limits)} entries for {len(S)} screw axes")
    L = np.array([_float_array(l, f"joint_limits[{i}]", (2,)) for i, l in enumerate(limits)])

    return RobotModel(
        name=data["name"],
        home_pose=_parse_pose(data["home_pose"], "home_pose"),
        screw_axes=S,
        joint_limits=L,
        mount_in_body=_parse_pose(data["mount_in_body"], "mount_in_body"),
    )


def serialize_model(model: RobotModel) -> str:
    data = {
        "name": model.name,
        "screw_axes": model.screw_axes.tolist(),
        "home_pose": pose_to_record(model.home_pose),
        "joint_limits": model.joint_limits.tolist(),
        "mount_in_body": pose_to_record(model.mount_in_body),
    }
    return json.dumps(data, indent=2) + "\n"


def load_model(path) -> RobotModel:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


def bundled_model_text(name: str) -> str:
    if name not in BUNDLED_MODELS:
        raise KeyError(f"no bundled model {name!r}; choose from {BUNDLED_MODELS}")
    return resources.files("wbkin.data").joinpath(f"{name}.json").read_text(encoding="utf-8")


def bundled_model(name: str) -> RobotModel:
    return parse_model(bundled_model_text(name))


def resolve_model(spec: str) -> RobotModel:
    """A bundled model name or a filesystem path."""
    if spec in BUNDLED_MODELS:
        return bundled_model(spec)
    return load_model(spec)


def forward_kinematics(model: RobotModel, q) -> Pose:
    """End-effector pose in the arm-base frame. Joint limits are not enforced."""
    return fk_and_body_jacobian(model, q)[0]


def fk_and_body_jacobian(model: RobotModel, q) -> tuple[Pose, np.ndarray]:
    """Forward kinematics and the body Jacobian from a single pass."""
    q = model.check_q(q)
    T, J = kernels.fk_and_body_jacobian(model.screw_axes, model.home_pose.as_matrix(), q[None])
    return Pose.from_matrix(T[0]), J[0]


def space_jacobian(model: RobotModel, q) -> np.ndarray:
    T, Jb = fk_and_body_jacobian(model, q)
    return adjoint(T) @ Jb


def body_jacobian(model: RobotModel, q) -> np.ndarray:
    """6 x n Jacobian giving the end-effector twist in its own frame.

    Column i is the first-order change of ``pose_diff(FK(q + h e_i), FK(q)) / h``.
    """
    return fk_and_body_jacobian(model, q)[1]


def near_limit(model: RobotModel, q, i: int, fraction: float = DEFAULT_LIMIT_FRACTION) -> bool:
    """True when joint i is outside the central ``fraction`` of its range.

    Measured relative to the range midpoint, so for symmetric limits this is
    ``q_i < fraction*q_min or q_i > fraction*q_max``.
    """
    if not 0 <= i < model.dof:
        raise IndexError(f"joint index {i} out of range for dof {model.dof}")
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    lo, hi = model.joint_limits[i]
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    return bool(abs(float(q[i]) - mid) > fraction * half)


def count_near_limit(model: RobotModel, q, fraction: float = DEFAULT_LIMIT_FRACTION) -> int:
    return sum(near_limit(model, q, i, fraction) for i in range(model.dof))


def clamp_to_limits(model: RobotModel, q) -> np.ndarray:
    return np.clip(model.check_q(q), model.q_min, model.q_max)


def random_configuration(model: RobotModel, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(model.q_min, model.q_max)
