"""Reference end-effector trajectories on SE(3).

A trajectory from ``t_init`` to ``t_end`` over ``t_total`` seconds follows
the geodesic

    T_ref(t) = t_init (+) s(t) * (t_end (-) t_init),   s(t) = 3u^2 - 2u^3,  u = t / t_total

so position and orientation start and stop with zero rate. Specs are frame
agnostic: express them in the projected ground frame and re-anchor with
``anchor_to_world`` as the torso moves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .feasibility import TorsoState, proj_frame
from .se3 import (
    Pose,
    pose_diff,
    pose_oplus,
    rotation_angle,
    sample_in_ball,
    sample_uniform_rotation,
)

DEFAULT_T_TOTAL = 3.0
DEFAULT_RADIUS = 1.0
PRINCIPAL_MARGIN = 1e-3


@dataclass(frozen=True, eq=False)
class TrajectorySpec:
    t_init: Pose
    t_end: Pose
    t_total: float = DEFAULT_T_TOTAL

    def __post_init__(self):
        if not self.t_total > 0:
            raise ValueError(f"t_total must be positive, got {self.t_total}")
        rel = self.t_init.inverse() @ self.t_end
        if rotation_angle(rel.rotation) >= np.pi - PRINCIPAL_MARGIN:
            raise ValueError("relative rotation of t_end to t_init is too close to pi")
        object.__setattr__(self, "delta", pose_diff(self.t_end, self.t_init))


@dataclass(frozen=True, eq=False)
class Waypoint:
    t: float
    pose: Pose
    twist: np.ndarray


def _phase(spec: TrajectorySpec, t: float) -> float:
    if not 0.0 <= t <= spec.t_total:
        raise ValueError(f"t = {t} outside [0, {spec.t_total}]")
    return t / spec.t_total


def progress(spec: TrajectorySpec, t: float) -> float:
    u = _phase(spec, t)
    return u * u * (3.0 - 2.0 * u)


def progress_rate(spec: TrajectorySpec, t: float) -> float:
    u = _phase(spec, t)
    return 6.0 * u * (1.0 - u) / spec.t_total


def interpolate(spec: TrajectorySpec, t: float) -> Pose:
    return pose_oplus(spec.t_init, progress(spec, t) * spec.delta)


def reference_twist(spec: TrajectorySpec, t: float) -> np.ndarray:
    """Rate of the exponential coordinate along the geodesic, s'(t) * delta."""
    return progress_rate(spec, t) * spec.delta


def time_grid(t_total: float, dt: float) -> np.ndarray:
    if not 0 < dt <= t_total:
        raise ValueError(f"dt must be in (0, t_total], got dt={dt}, t_total={t_total}")
    n = int(np.floor(t_total / dt + 1e-9))
    times = [k * dt for k in range(n + 1)]
    if t_total - times[-1] > 1e-9 * t_total:
        times.append(t_total)
    else:
        times[-1] = t_total
    return np.array(times)


def generate_trajectory(spec: TrajectorySpec, dt: float) -> list[Waypoint]:
    """Waypoints at 0, dt, 2dt, ... and exactly at t_total."""
    return [Waypoint(float(t), interpolate(spec, t), reference_twist(spec, t)) for t in time_grid(spec.t_total, dt)]


def sample_target(rng: np.random.Generator, center: Pose | None = None, radius: float = DEFAULT_RADIUS) -> Pose:
    """Position uniform in a ball around ``center``, orientation Haar-uniform."""
    center = center if center is not None else Pose.identity()
    offset = sample_in_ball(rng, radius)
    return Pose(sample_uniform_rotation(rng), center.translation + offset)


def anchor_to_world(torso: TorsoState, pose_in_proj: Pose) -> Pose:
    """World pose of a trajectory point stored in the projected ground frame."""
    return proj_frame(torso) @ pose_in_proj
