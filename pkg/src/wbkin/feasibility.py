"""Torso-dependent feasibility of world-frame end-effector targets.

A torso state is feasible for a world target when some in-limit arm
configuration reaches the target once it is re-expressed in the arm-base
frame:

    T_arm = mount^-1 . torso^-1 . T_world

The existence check is approximated by multistart numeric IK, which is sound
(a reported success is a verified witness) but incomplete.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .ik import (
    IkParams,
    derive_rng,
    draw_starts,
    solve_ik_multistart_batch,
)
from .model import RobotModel, clamp_to_limits
from .se3 import Pose, euler_zxy, matrix_to_quat, quat_to_matrix, rot_z

GIMBAL_MARGIN = 1e-3
DEFAULT_RESTARTS = 4


class GimbalDegeneracyError(ValueError):
    """Heading is undefined for this torso orientation."""


@dataclass(frozen=True, eq=False)
class TorsoState:
    pose_in_world: Pose


@dataclass(frozen=True, eq=False)
class FeasibilityOutcome:
    feasible: bool
    q_ideal: np.ndarray
    body_target: Pose
    iterations: int = 0
    final_error: float = float("nan")


def world_to_body_target(torso: TorsoState, world_target: Pose) -> Pose:
    return torso.pose_in_world.inverse() @ world_target


def world_to_arm_target(torso: TorsoState, world_target: Pose, model: RobotModel) -> Pose:
    """World target re-expressed in the arm-base frame through torso and mount."""
    return model.mount_in_body.inverse() @ world_to_body_target(torso, world_target)


def default_q_real(model: RobotModel) -> np.ndarray:
    return clamp_to_limits(model, np.zeros(model.dof))


def feasible_state(
    torso: TorsoState,
    world_target: Pose,
    model: RobotModel,
    params: IkParams | None = None,
    restarts: int = DEFAULT_RESTARTS,
    rng: np.random.Generator | None = None,
    q_real=None,
    warm_start=None,
) -> FeasibilityOutcome:
    """Evaluate the feasibility indicator for one torso state and world target.

    ``q_real`` is the measured arm configuration returned on failure; it
    defaults to the zero configuration clamped into the limits. ``warm_start``
    defaults to ``q_real``.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    q_real = default_q_real(model) if q_real is None else model.check_q(q_real, "q_real")
    arm_target = world_to_arm_target(torso, world_target, model)
    starts = draw_starts(model, q_real, restarts, rng, warm_start)
    res = solve_ik_multistart_batch(model, [arm_target], q_real[None], starts[None], params)[0]
    return FeasibilityOutcome(res.feasible, res.q, arm_target, res.iterations, res.final_error)


def feasible_states_batch(
    torsos,
    world_targets,
    model: RobotModel,
    params: IkParams | None = None,
    restarts: int = DEFAULT_RESTARTS,
    rngs=None,
    q_real=None,
):
    """Vectorized ``feasible_state`` over paired torsos and targets.

    ``rngs`` supplies one generator per case (defaults to streams derived
    from seed 0 and the case index). Returns the batch IK result and the
    arm-frame targets.
    """
    torsos = list(torsos)
    world_targets = list(world_targets)
    if len(torsos) != len(world_targets):
        raise ValueError(f"{len(torsos)} torso states for {len(world_targets)} targets")
    N = len(torsos)
    if rngs is None:
        rngs = [derive_rng(0, i) for i in range(N)]
    q_real = default_q_real(model) if q_real is None else model.check_q(q_real, "q_real")
    arm_targets = [world_to_arm_target(t, w, model) for t, w in zip(torsos, world_targets)]
    starts = np.array([draw_starts(model, q_real, restarts, r) for r in rngs]).reshape(N, restarts + 1, model.dof)
    q_reals = np.broadcast_to(q_real, (N, model.dof))
    return solve_ik_multistart_batch(model, arm_targets, q_reals, starts, params), arm_targets


def proj_frame(torso: TorsoState) -> Pose:
    """Torso frame projected onto the ground plane z = 0, keeping only yaw.

    Yaw comes from the z-x-y decomposition R = Rz(yaw) Rx(roll) Ry(pitch),
    which is undefined when the middle (x) angle reaches +-pi/2.
    """
    R = torso.pose_in_world.rotation
    if abs(R[2, 1]) > np.cos(GIMBAL_MARGIN):
        raise GimbalDegeneracyError("torso orientation is within 1e-3 rad of the z-x-y gimbal lock")
    yaw, _, _ = euler_zxy(R)
    x, y, _ = torso.pose_in_world.translation
    return Pose(rot_z(yaw), [x, y, 0.0])


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Axis-aligned box sampled at ``resolution`` nodes per axis (endpoints included).

    An axis with resolution 1 must have equal lower and upper bounds.
    """

    lower: np.ndarray
    upper: np.ndarray
    resolution: tuple[int, int, int]

    def __post_init__(self):
        lo = np.array(self.lower, dtype=float).reshape(3)
        hi = np.array(self.upper, dtype=float).reshape(3)
        res = tuple(int(r) for r in self.resolution)
        if len(res) != 3:
            raise ValueError(f"resolution needs 3 entries, got {res}")
        for axis in range(3):
            if res[axis] < 1:
                raise ValueError(f"resolution[{axis}] must be >= 1, got {res[axis]}")
            if res[axis] == 1 and lo[axis] != hi[axis]:
                raise ValueError(f"axis {axis} has resolution 1 but lower != upper")
            if res[axis] >= 2 and not lo[axis] < hi[axis]:
                raise ValueError(f"axis {axis} needs lower < upper")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "resolution", res)

    def axes(self) -> list[np.ndarray]:
        return [np.linspace(self.lower[a], self.upper[a], self.resolution[a]) for a in range(3)]

    def nodes(self) -> np.ndarray:
        """Node positions (nx*ny*nz, 3), row-major with x slowest."""
        X, Y, Z = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)


def feasibility_map(
    model: RobotModel,
    torso: TorsoState,
    grid: GridSpec,
    fixed_rotation,
    params: IkParams | None = None,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    q_real=None,
) -> np.ndarray:
    """Feasibility at every grid node (world frame) for one target rotation.

    Node k draws its restarts from ``derive_rng(seed, k)``, so the map does
    not depend on evaluation order. Returns a bool array of shape
    ``grid.resolution``.
    """
    R = np.asarray(fixed_rotation, dtype=float)
    nodes = grid.nodes()
    targets = [Pose(R, p) for p in nodes]
    torsos = [torso] * len(nodes)
    rngs = [derive_rng(seed, k) for k in range(len(nodes))]
    res, _ = feasible_states_batch(torsos, targets, model, params, restarts, rngs, q_real)
    return res.feasible.reshape(grid.resolution)


def format_feasibility_map(fmap: np.ndarray, grid: GridSpec, seed: int, rotation) -> str:
    """Header record, then one line of 0/1 per (z, x) pair listing y nodes.

    Lines are ordered z-slice by z-slice, x ascending within a slice.
    """
    header = {
        "lower": grid.lower.tolist(),
        "upper": grid.upper.tolist(),
        "resolution": list(grid.resolution),
        "seed": int(seed),
        "rotation": matrix_to_quat(rotation).tolist(),
    }
    lines = [json.dumps(header, sort_keys=True)]
    nx, ny, nz = grid.resolution
    for iz in range(nz):
        for ix in range(nx):
            lines.append("".join("1" if v else "0" for v in fmap[ix, :, iz]))
    return "\n".join(lines) + "\n"


def parse_feasibility_map(text: str) -> tuple[np.ndarray, GridSpec, int, np.ndarray]:
    lines = text.splitlines()
    header = json.loads(lines[0])
    grid = GridSpec(header["lower"], header["upper"], header["resolution"])
    nx, ny, nz = grid.resolution
    rows = lines[1:]
    if len(rows) != nx * nz:
        raise ValueError(f"expected {nx * nz} map rows, found {len(rows)}")
    fmap = np.zeros(grid.resolution, dtype=bool)
    for k, row in enumerate(rows):
        iz, ix = divmod(k, nx)
        if len(row) != ny or set(row) - {"0", "1"}:
            raise ValueError(f"map row {k + 2}: expected {ny} characters of 0/1")
        fmap[ix, :, iz] = [c == "1" for c in row]
    return fmap, grid, int(header["seed"]), quat_to_matrix(header["rotation"])
