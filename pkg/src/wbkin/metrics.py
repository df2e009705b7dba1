"""Evaluation metrics: IK solution rate, pose accuracy and velocity tracking."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .feasibility import TorsoState, feasible_states_batch
from .ik import IkParams, derive_rng
from .model import RobotModel
from .se3 import Pose, geodesic_distance


@dataclass(frozen=True, eq=False)
class AccuracySample:
    target: Pose
    achieved: Pose


@dataclass(frozen=True, eq=False)
class VelocitySample:
    cmd_linear: np.ndarray
    measured_linear: np.ndarray
    cmd_angular: float
    measured_angular: float

    def __post_init__(self):
        for name in ("cmd_linear", "measured_linear"):
            v = np.array(getattr(self, name), dtype=float).reshape(-1)
            if v.shape != (3,):
                raise ValueError(f"{name} must have length 3")
            object.__setattr__(self, name, v)
        vals = [*self.cmd_linear, *self.measured_linear, self.cmd_angular, self.measured_angular]
        if not np.all(np.isfinite(vals)):
            raise ValueError("velocity sample has non-finite values")


def _nonempty(xs, what: str):
    xs = list(xs)
    if not xs:
        raise ValueError(f"{what} is empty")
    return xs


def case_key(torso: TorsoState, target: Pose) -> tuple[int, ...]:
    """Stream key derived from the case contents, so order does not matter."""
    data = np.concatenate([torso.pose_in_world.as_matrix().ravel(), target.as_matrix().ravel()])
    digest = hashlib.sha256(np.ascontiguousarray(data, dtype="<f8").tobytes()).digest()
    return tuple(int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4))


def ik_solution_rate(
    cases: Sequence[tuple[TorsoState, Pose]],
    model: RobotModel,
    params: IkParams | None = None,
    restarts: int = 4,
    seed: int = 0,
    q_real=None,
) -> float:
    """Fraction of (torso, world target) cases that are feasible.

    Each case draws its restarts from ``derive_rng(seed, *case_key(...))``,
    making the rate independent of case order.
    """
    cases = _nonempty(cases, "cases")
    torsos = [c[0] for c in cases]
    targets = [c[1] for c in cases]
    rngs = [derive_rng(seed, *case_key(t, w)) for t, w in cases]
    res, _ = feasible_states_batch(torsos, targets, model, params, restarts, rngs, q_real)
    return float(np.count_nonzero(res.feasible)) / len(cases)


def pose_errors(samples: Sequence[AccuracySample]) -> tuple[np.ndarray, np.ndarray]:
    """Positional (m) and rotational geodesic (rad) errors per sample."""
    samples = _nonempty(samples, "samples")
    pe = np.array([np.linalg.norm(s.target.translation - s.achieved.translation) for s in samples])
    re = np.array([geodesic_distance(s.target.rotation, s.achieved.rotation) for s in samples])
    return pe, re


def percentile(values, p: float) -> float:
    """Nearest-rank percentile: the k-th smallest value, k = ceil(p/100 * N)."""
    vals = np.sort(np.asarray(_nonempty(values, "values"), dtype=float))
    if not 0 < p <= 100:
        raise ValueError(f"p must be in (0, 100], got {p}")
    k = math.ceil(Fraction(p) * len(vals) / 100)
    return float(vals[k - 1])


def velocity_tracking_errors(samples: Sequence[VelocitySample]) -> dict:
    """Mean and population std of linear and angular tracking errors."""
    samples = _nonempty(samples, "samples")
    lin = np.array([np.linalg.norm(s.cmd_linear - s.measured_linear) for s in samples])
    ang = np.array([abs(s.cmd_angular - s.measured_angular) for s in samples])
    return {
        "lvte_mean": float(np.mean(lin)),
        "lvte_std": float(np.std(lin)),
        "avte_mean": float(np.mean(ang)),
        "avte_std": float(np.std(ang)),
    }


SUMMARY_KEYS = ("pe_p60", "re_p60", "lvte_mean", "lvte_std", "avte_mean", "avte_std", "ik_rate")


def summarize(
    accuracy: Sequence[AccuracySample] = (),
    velocity: Sequence[VelocitySample] = (),
    ik_rate: float | None = None,
    p: float = 60.0,
) -> dict:
    """Summary record; groups with no samples are reported as None."""
    out = dict.fromkeys(SUMMARY_KEYS)
    if len(accuracy):
        pe, re = pose_errors(accuracy)
        out["pe_p60"], out["re_p60"] = percentile(pe, p), percentile(re, p)
    if len(velocity):
        out.update(velocity_tracking_errors(velocity))
    out["ik_rate"] = ik_rate
    return out
