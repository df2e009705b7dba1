"""SO(3)/SE(3) exponential and logarithm maps, pose arithmetic and sampling.

Conventions:
    - Rotations are 3x3 numpy arrays. Quaternions are (w, x, y, z).
    - Twists are 6-vectors ordered (angular, linear).
    - ``pose_diff(Ta, Tb) = log(Tb^-1 Ta)`` is expressed in the local frame of
      ``Tb``; ``pose_oplus(T, xi) = T exp(xi)`` is its exact inverse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_SMALL_ANGLE = 1e-8
# Closed-form coefficients with cubic-or-higher cancellation switch to series here.
_SERIES_ANGLE = 0.2
# Below this cosine the skew part is too short to recover the axis accurately.
_NEAR_PI_COS = -0.99
PI_BRANCH_TOL = 1e-6


class BranchAmbiguityError(ValueError):
    """Raised when a logarithm is requested at a rotation angle of pi."""


def skew(w) -> np.ndarray:
    wx, wy, wz = w
    return np.array([[0.0, -wz, wy], [wz, 0.0, -wx], [-wy, wx, 0.0]])


def vee(W) -> np.ndarray:
    return np.array([W[2, 1], W[0, 2], W[1, 0]])


def so3_exp(omega) -> np.ndarray:
    """Rodrigues formula for a rotation vector (axis times angle)."""
    w = np.asarray(omega, dtype=float)
    theta2 = float(w @ w)
    theta = np.sqrt(theta2)
    W = skew(w)
    if theta < _SMALL_ANGLE:
        a = 1.0 - theta2 / 6.0
        b = 0.5 - theta2 / 24.0
    else:
        half = 0.5 * theta
        a = np.sin(theta) / theta
        b = 0.5 * (np.sin(half) / half) ** 2
    return np.eye(3) + a * W + b * (W @ W)


def _canonical_axis_sign(axis: np.ndarray) -> np.ndarray:
    for c in axis:
        if abs(c) > 1e-12:
            return axis if c > 0 else -axis
    return axis


def so3_log(R) -> np.ndarray:
    """Principal logarithm, angle in [0, pi].

    At an angle of exactly pi the axis is returned with its first nonzero
    component positive.
    """
    R = np.asarray(R, dtype=float)
    skew_part = vee(R - R.T) / 2.0
    s = np.linalg.norm(skew_part)
    c = (np.trace(R) - 1.0) / 2.0
    theta = np.arctan2(s, c)
    if theta < _SMALL_ANGLE:
        return skew_part * (1.0 + theta * theta / 6.0)
    if c > _NEAR_PI_COS:
        return skew_part * (theta / s)
    # Near pi: recover the axis from the symmetric part, aa^T = (sym - cI)/(1 - c).
    B = ((R + R.T) / 2.0 - c * np.eye(3)) / (1.0 - c)
    k = int(np.argmax(np.diag(B)))
    axis = B[:, k] / np.sqrt(B[k, k])
    axis /= np.linalg.norm(axis)
    if s > 1e-12:
        if axis @ skew_part < 0:
            axis = -axis
    else:
        axis = _canonical_axis_sign(axis)
    return axis * theta


def rotation_angle(R) -> float:
    R = np.asarray(R, dtype=float)
    s = np.linalg.norm(vee(R - R.T)) / 2.0
    c = (np.trace(R) - 1.0) / 2.0
    return float(np.arctan2(s, c))


def _left_jacobian_coeffs(theta: float) -> tuple[float, float]:
    """Coefficients of W and W^2 in the SO(3) left Jacobian."""
    t2 = theta * theta
    half = 0.5 * theta
    b = 0.5 if theta < _SMALL_ANGLE else 0.5 * (np.sin(half) / half) ** 2
    if theta < _SERIES_ANGLE:
        c = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0 - t2**3 / 362880.0
    else:
        c = (theta - np.sin(theta)) / (t2 * theta)
    return b, c


def so3_left_jacobian(omega) -> np.ndarray:
    w = np.asarray(omega, dtype=float)
    W = skew(w)
    b, c = _left_jacobian_coeffs(float(np.linalg.norm(w)))
    return np.eye(3) + b * W + c * (W @ W)


def so3_left_jacobian_inv(omega) -> np.ndarray:
    w = np.asarray(omega, dtype=float)
    theta = float(np.linalg.norm(w))
    W = skew(w)
    t2 = theta * theta
    if theta < _SERIES_ANGLE:
        d = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0 + t2**3 / 1209600.0
    else:
        half = 0.5 * theta
        d = (1.0 - half / np.tan(half)) / t2
    return np.eye(3) - 0.5 * W + d * (W @ W)


@dataclass(frozen=True, eq=False)
class Pose:
    """Rigid transform mapping points from a child frame into its parent."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = np.array(self.rotation, dtype=float).reshape(3, 3)
        p = np.array(self.translation, dtype=float).reshape(3)
        R.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", p)

    @classmethod
    def identity(cls) -> Pose:
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, T) -> Pose:
        T = np.asarray(T, dtype=float)
        return cls(T[:3, :3], T[:3, 3])

    @classmethod
    def from_quaternion(cls, position, quaternion) -> Pose:
        return cls(quat_to_matrix(quaternion), position)

    def as_matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.rotation
        T[:3, 3] = self.translation
        return T

    @property
    def quaternion(self) -> np.ndarray:
        return matrix_to_quat(self.rotation)

    def compose(self, other: Pose) -> Pose:
        return Pose(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    __matmul__ = compose

    def inverse(self) -> Pose:
        Rt = self.rotation.T
        return Pose(Rt, -Rt @ self.translation)

    def apply(self, point) -> np.ndarray:
        return self.rotation @ np.asarray(point, dtype=float) + self.translation

    def __repr__(self) -> str:
        return f"Pose(position={self.translation.tolist()}, quaternion={self.quaternion.tolist()})"


def quat_to_matrix(q) -> np.ndarray:
    """Unit quaternion (w, x, y, z) to rotation matrix; the input is normalized."""
    q = np.asarray(q, dtype=float)
    w, x, y, z = q / np.linalg.norm(q)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def matrix_to_quat(R) -> np.ndarray:
    """Rotation matrix to unit quaternion (w, x, y, z) with w >= 0."""
    R = np.asarray(R, dtype=float)
    tr = np.trace(R)
    if tr > 0:
        S = np.sqrt(tr + 1.0) * 2
        q = np.array([0.25 * S, (R[2, 1] - R[1, 2]) / S, (R[0, 2] - R[2, 0]) / S, (R[1, 0] - R[0, 1]) / S])
    elif R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
        S = np.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2
        q = np.array([(R[2, 1] - R[1, 2]) / S, 0.25 * S, (R[0, 1] + R[1, 0]) / S, (R[0, 2] + R[2, 0]) / S])
    elif R[1, 1] > R[2, 2]:
        S = np.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2]) * 2
        q = np.array([(R[0, 2] - R[2, 0]) / S, (R[0, 1] + R[1, 0]) / S, 0.25 * S, (R[1, 2] + R[2, 1]) / S])
    else:
        S = np.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1]) * 2
        q = np.array([(R[1, 0] - R[0, 1]) / S, (R[0, 2] + R[2, 0]) / S, (R[1, 2] + R[2, 1]) / S, 0.25 * S])
    q /= np.linalg.norm(q)
    return -q if q[0] < 0 else q


def se3_exp(xi) -> Pose:
    xi = np.asarray(xi, dtype=float)
    omega, v = xi[:3], xi[3:]
    return Pose(so3_exp(omega), so3_left_jacobian(omega) @ v)


def se3_log(T: Pose, strict: bool = True) -> np.ndarray:
    """Principal SE(3) logarithm as a (angular, linear) twist.

    Raises BranchAmbiguityError when the rotation angle is within 1e-6 of pi,
    unless ``strict`` is false, in which case the so3_log axis rule decides.
    """
    if strict and np.pi - rotation_angle(T.rotation) < PI_BRANCH_TOL:
        raise BranchAmbiguityError("rotation angle is pi; logarithm is not unique")
    omega = so3_log(T.rotation)
    v = so3_left_jacobian_inv(omega) @ T.translation
    return np.concatenate([omega, v])


def pose_diff(Ta: Pose, Tb: Pose, strict: bool = True) -> np.ndarray:
    """Ta minus Tb: the twist, local to Tb, that carries Tb onto Ta."""
    return se3_log(Tb.inverse() @ Ta, strict=strict)


def pose_oplus(T: Pose, xi) -> Pose:
    return T @ se3_exp(xi)


def adjoint(T: Pose) -> np.ndarray:
    """6x6 adjoint for (angular, linear) twists."""
    R, p = T.rotation, T.translation
    Ad = np.zeros((6, 6))
    Ad[:3, :3] = R
    Ad[3:, 3:] = R
    Ad[3:, :3] = skew(p) @ R
    return Ad


def se3_left_jacobian_inv(xi) -> np.ndarray:
    """Inverse left Jacobian of SE(3) for (angular, linear) twists.

    Block form [[J^-1, 0], [-J^-1 Q J^-1, J^-1]] with J the SO(3) left Jacobian.
    """
    xi = np.asarray(xi, dtype=float)
    omega, v = xi[:3], xi[3:]
    Jinv = so3_left_jacobian_inv(omega)
    Q = _se3_q_block(omega, v)
    out = np.zeros((6, 6))
    out[:3, :3] = Jinv
    out[3:, 3:] = Jinv
    out[3:, :3] = -Jinv @ Q @ Jinv
    return out


def _se3_q_block(omega, v) -> np.ndarray:
    theta = float(np.linalg.norm(omega))
    W, V = skew(omega), skew(v)
    WV, VW = W @ V, V @ W
    WVW = W @ VW
    t2 = theta * theta
    if theta < _SERIES_ANGLE:
        t4, t6 = t2 * t2, t2**3
        c1 = 1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0 - t6 / 362880.0
        c2 = 1.0 / 24.0 - t2 / 720.0 + t4 / 40320.0 - t6 / 3628800.0
        c3 = 1.0 / 120.0 - t2 / 2520.0 + t4 / 120960.0 - t6 / 9979200.0
    else:
        s, c = np.sin(theta), np.cos(theta)
        c1 = (theta - s) / (t2 * theta)
        c2 = (t2 + 2.0 * c - 2.0) / (2.0 * t2 * t2)
        c3 = (2.0 * theta - 3.0 * s + theta * c) / (2.0 * t2 * t2 * theta)
    return (
        0.5 * V
        + c1 * (WV + VW + WVW)
        + c2 * (W @ WV + VW @ W - 3.0 * WVW)
        + c3 * (WVW @ W + W @ WVW)
    )


def geodesic_distance(Ra, Rb) -> float:
    """Angle of the relative rotation Ra^T Rb, in [0, pi]."""
    return rotation_angle(np.asarray(Ra).T @ np.asarray(Rb))


def sample_uniform_rotation(rng: np.random.Generator) -> np.ndarray:
    """Haar-uniform rotation via a normalized 4D Gaussian quaternion."""
    q = rng.standard_normal(4)
    while np.linalg.norm(q) < 1e-12:
        q = rng.standard_normal(4)
    return quat_to_matrix(q)


def sample_in_ball(rng: np.random.Generator, radius: float = 1.0) -> np.ndarray:
    """Point uniform by volume in the closed ball of the given radius."""
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    d = rng.standard_normal(3)
    while np.linalg.norm(d) < 1e-12:
        d = rng.standard_normal(3)
    d /= np.linalg.norm(d)
    return d * radius * rng.random() ** (1.0 / 3.0)


def euler_zxy(R) -> tuple[float, float, float]:
    """(yaw, roll, pitch) with R = Rz(yaw) Rx(roll) Ry(pitch).

    Degenerate when |roll| = pi/2; the caller decides how close is too close.
    """
    R = np.asarray(R, dtype=float)
    roll = float(np.arcsin(np.clip(R[2, 1], -1.0, 1.0)))
    yaw = float(np.arctan2(-R[0, 1], R[1, 1]))
    pitch = float(np.arctan2(-R[2, 0], R[2, 2]))
    return yaw, roll, pitch


def rot_x(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
