"""Batched array kernels for the iterative solvers.

Every function takes a leading batch axis N. These mirror the scalar
functions in ``se3`` and ``model`` and are checked against them in the tests.
"""

from __future__ import annotations

import numpy as np

from .se3 import _NEAR_PI_COS, _SERIES_ANGLE, _SMALL_ANGLE


def cross(a, b):
    return a[..., [1, 2, 0]] * b[..., [2, 0, 1]] - a[..., [2, 0, 1]] * b[..., [1, 2, 0]]


def skew(w):
    K = np.zeros(w.shape[:-1] + (3, 3))
    K[..., 0, 1], K[..., 0, 2], K[..., 1, 2] = -w[..., 2], w[..., 1], -w[..., 0]
    K[..., 1, 0], K[..., 2, 0], K[..., 2, 1] = w[..., 2], -w[..., 1], w[..., 0]
    return K


def mv(A, x):
    return (A @ x[..., None])[..., 0]


def fk_and_body_jacobian(screw_axes, home, q):
    """End-effector transforms (N,4,4) and body Jacobians (N,6,n).

    ``screw_axes`` is (n,6) with unit axes, ``home`` a 4x4 matrix, q (N,n).
    """
    N, n = q.shape
    w, v = screw_axes[:, :3], screw_axes[:, 3:]
    K = skew(w)
    KK = K @ K
    s = np.sin(q)[..., None, None]
    c = (1.0 - np.cos(q))[..., None, None]
    eye = np.eye(3)
    G = np.zeros((N, n, 4, 4))
    G[..., :3, :3] = eye + s * K + c * KK
    V = q[..., None, None] * eye + c * K + (q[..., None, None] - s) * KK
    G[..., :3, 3] = mv(V, np.broadcast_to(v, (N, n, 3)))
    G[..., 3, 3] = 1.0

    P = np.empty((N, n + 1, 4, 4))
    P[:, 0] = np.eye(4)
    for i in range(n):
        P[:, i + 1] = P[:, i] @ G[:, i]
    T = P[:, -1] @ home

    Rt = np.swapaxes(T[:, :3, :3], -1, -2)[:, None]
    B_R = Rt @ P[:, :-1, :3, :3]
    B_p = mv(Rt, P[:, :-1, :3, 3] - T[:, None, :3, 3])
    jw = mv(B_R, np.broadcast_to(w, (N, n, 3)))
    jv = mv(B_R, np.broadcast_to(v, (N, n, 3))) + cross(B_p, jw)
    J = np.swapaxes(np.concatenate([jw, jv], axis=-1), -1, -2)
    return T, J


def so3_log(R):
    """Principal log of a stack of rotations, same rules as ``se3.so3_log``."""
    R = np.asarray(R, dtype=float)
    skew_part = 0.5 * np.stack(
        [R[..., 2, 1] - R[..., 1, 2], R[..., 0, 2] - R[..., 2, 0], R[..., 1, 0] - R[..., 0, 1]], axis=-1
    )
    s = np.linalg.norm(skew_part, axis=-1)
    c = 0.5 * (np.trace(R, axis1=-2, axis2=-1) - 1.0)
    theta = np.arctan2(s, c)
    out = np.empty_like(skew_part)

    small = theta < _SMALL_ANGLE
    near_pi = ~small & (c <= _NEAR_PI_COS)
    regular = ~small & ~near_pi
    out[small] = skew_part[small] * (1.0 + theta[small, None] ** 2 / 6.0)
    out[regular] = skew_part[regular] * (theta[regular] / s[regular])[:, None]
    for idx in np.flatnonzero(near_pi):
        Ri, ci = R[idx], c[idx]
        B = (0.5 * (Ri + Ri.T) - ci * np.eye(3)) / (1.0 - ci)
        k = int(np.argmax(np.diag(B)))
        axis = B[:, k] / np.sqrt(B[k, k])
        axis /= np.linalg.norm(axis)
        if s[idx] > 1e-12:
            if axis @ skew_part[idx] < 0:
                axis = -axis
        else:
            for comp in axis:
                if abs(comp) > 1e-12:
                    axis = axis if comp > 0 else -axis
                    break
        out[idx] = axis * theta[idx]
    return out


def _series_or(theta, series, closed):
    """Evaluate ``closed`` only where theta is large enough to be accurate."""
    out = series(theta)
    big = theta >= _SERIES_ANGLE
    if np.any(big):
        out[big] = closed(theta[big])
    return out


def _jl_inv_coeff(theta):
    def series(t):
        t2 = t * t
        return 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0 + t2**3 / 1209600.0

    def closed(t):
        half = 0.5 * t
        return (1.0 - half / np.tan(half)) / (t * t)

    return _series_or(theta, series, closed)


def so3_left_jacobian_inv(omega):
    theta = np.linalg.norm(omega, axis=-1)
    W = skew(omega)
    d = _jl_inv_coeff(theta)[..., None, None]
    return np.eye(3) - 0.5 * W + d * (W @ W)


def se3_log(R, p):
    """Twists (N,6) for transforms given as rotations (N,3,3), translations (N,3)."""
    omega = so3_log(R)
    return np.concatenate([omega, mv(so3_left_jacobian_inv(omega), p)], axis=-1)


def pose_diff(R_a, p_a, R_b, p_b):
    """Batched ``log(Tb^-1 Ta)`` with the non-strict branch rule at pi."""
    R_bt = np.swapaxes(R_b, -1, -2)
    return se3_log(R_bt @ R_a, mv(R_bt, p_a - p_b))


def _q_coeffs(theta):
    def s1(t):
        t2 = t * t
        return 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0 - t2**3 / 362880.0

    def c1(t):
        return (t - np.sin(t)) / t**3

    def s2(t):
        t2 = t * t
        return 1.0 / 24.0 - t2 / 720.0 + t2 * t2 / 40320.0 - t2**3 / 3628800.0

    def c2(t):
        return (t * t + 2.0 * np.cos(t) - 2.0) / (2.0 * t**4)

    def s3(t):
        t2 = t * t
        return 1.0 / 120.0 - t2 / 2520.0 + t2 * t2 / 120960.0 - t2**3 / 9979200.0

    def c3(t):
        return (2.0 * t - 3.0 * np.sin(t) + t * np.cos(t)) / (2.0 * t**5)

    return _series_or(theta, s1, c1), _series_or(theta, s2, c2), _series_or(theta, s3, c3)


def se3_left_jacobian_inv(xi):
    """Stack of 6x6 inverse left Jacobians for (angular, linear) twists."""
    omega, v = xi[..., :3], xi[..., 3:]
    theta = np.linalg.norm(omega, axis=-1)
    W, V = skew(omega), skew(v)
    WV, VW = W @ V, V @ W
    WVW = W @ VW
    c1, c2, c3 = (c[..., None, None] for c in _q_coeffs(theta))
    Q = 0.5 * V + c1 * (WV + VW + WVW) + c2 * (W @ WV + VW @ W - 3.0 * WVW) + c3 * (WVW @ W + W @ WVW)
    Jinv = so3_left_jacobian_inv(omega)
    out = np.zeros(xi.shape[:-1] + (6, 6))
    out[..., :3, :3] = Jinv
    out[..., 3:, 3:] = Jinv
    out[..., 3:, :3] = -Jinv @ Q @ Jinv
    return out
