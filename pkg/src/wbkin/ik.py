"""Damped least-squares inverse kinematics with joint-limit column zeroing.

Each iteration, for the current joint vector q:

    T  = FK(q)
    ev = target (-) T                      error twist, local to T
    e  = 0.5 ev^T We ev                    success when e <= tol
    J  = error-twist Jacobian, with columns of limit-locked joints zeroed
    D  = J^T We J + 0.5 (ev^T We ev + delta) I
    q  = clamp(q + D^-1 J^T We ev)

If no iterate meets the tolerance the solver reports failure and returns the
caller's measured joint vector ``q_real`` unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .model import RobotModel, random_configuration
from .se3 import Pose

JACOBIANS = ("error", "body")


class NumericalFailure(ArithmeticError):
    """A non-finite value appeared during the iteration (distinct from infeasible)."""


@dataclass(frozen=True, eq=False)
class IkParams:
    """Solver settings.

    ``jacobian="error"`` differentiates the error twist exactly (the body
    Jacobian premultiplied by the inverse SE(3) left Jacobian of ``ev``);
    ``"body"`` uses the plain body Jacobian. The two agree as ``ev -> 0``.
    """

    weight: np.ndarray = field(default_factory=lambda: np.eye(6))
    delta: float = 1e-3
    max_iters: int = 10
    tol: float = 1e-3
    jacobian: str = "error"

    def __post_init__(self):
        W = np.array(self.weight, dtype=float)
        if W.shape == (6,):
            W = np.diag(W)
        if W.shape != (6, 6):
            raise ValueError(f"weight must be 6x6 or a 6-vector diagonal, got shape {W.shape}")
        if np.max(np.abs(W - W.T)) > 1e-12:
            raise ValueError("weight must be symmetric")
        try:
            np.linalg.cholesky(W)
        except np.linalg.LinAlgError:
            raise ValueError("weight must be positive-definite") from None
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if not self.delta >= 0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")
        if self.jacobian not in JACOBIANS:
            raise ValueError(f"jacobian must be one of {JACOBIANS}, got {self.jacobian!r}")
        W.flags.writeable = False
        object.__setattr__(self, "weight", W)


def translation_weight(rotation: float = 1e-6, translation: float = 100.0) -> np.ndarray:
    """Diagonal twist weight that all but ignores orientation error.

    With ``tol = 1e-3`` the default accepts at most sqrt(2 tol / 100) ~ 4.5 mm
    of positional error. Intended for arms with fewer than six joints.
    """
    return np.diag([rotation] * 3 + [translation] * 3)


@dataclass(frozen=True, eq=False)
class IkCase:
    target: Pose
    warm_start: np.ndarray
    q_real: np.ndarray


@dataclass(frozen=True, eq=False)
class IkResult:
    q: np.ndarray
    feasible: bool
    iterations: int
    final_error: float

    def __eq__(self, other):
        if not isinstance(other, IkResult):
            return NotImplemented
        return (
            np.array_equal(self.q, other.q)
            and self.feasible == other.feasible
            and self.iterations == other.iterations
            and (self.final_error == other.final_error)
        )


@dataclass(frozen=True, eq=False)
class BatchIkResult:
    """Column-wise results for N cases."""

    q: np.ndarray  # (N, n)
    feasible: np.ndarray  # (N,)
    iterations: np.ndarray  # (N,)
    final_error: np.ndarray  # (N,)

    def __len__(self):
        return len(self.feasible)

    def __getitem__(self, i) -> IkResult:
        return IkResult(self.q[i].copy(), bool(self.feasible[i]), int(self.iterations[i]), float(self.final_error[i]))


def _stack_targets(targets) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(targets, tuple):
        R, p = targets
        return np.asarray(R, dtype=float), np.asarray(p, dtype=float)
    R = np.array([t.rotation for t in targets]).reshape(-1, 3, 3)
    p = np.array([t.translation for t in targets]).reshape(-1, 3)
    return R, p


def _check_joints(model: RobotModel, q, N: int, what: str) -> np.ndarray:
    q = np.array(q, dtype=float)
    if q.shape != (N, model.dof):
        raise ValueError(f"{what} has shape {q.shape}, expected ({N}, {model.dof})")
    return q


def solve_ik_batch(
    model: RobotModel,
    targets: Sequence[Pose] | tuple[np.ndarray, np.ndarray],
    warm_starts,
    q_real,
    params: IkParams | None = None,
) -> BatchIkResult:
    """Run the solver on N independent cases at once.

    ``targets`` is a sequence of Poses (arm-base frame) or a pair of stacked
    arrays (rotations (N,3,3), translations (N,3)).
    """
    params = params or IkParams()
    R_t, p_t = _stack_targets(targets)
    N = len(R_t)
    q = _check_joints(model, warm_starts, N, "warm_starts")
    q_real = _check_joints(model, q_real, N, "q_real")
    S, M = model.screw_axes, model.home_pose.as_matrix()
    lo, hi = model.q_min, model.q_max
    W = params.weight
    eye = np.eye(model.dof)

    feasible = np.zeros(N, dtype=bool)
    iterations = np.full(N, params.max_iters, dtype=int)
    final_error = np.full(N, np.nan)
    locked = np.zeros((N, model.dof), dtype=bool)
    active = np.arange(N)

    # overflow surfaces through the finiteness checks below
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(params.max_iters):
            if active.size == 0:
                break
            qa = q[active]
            T, J = kernels.fk_and_body_jacobian(S, M, qa)
            ev = kernels.pose_diff(R_t[active], p_t[active], T[:, :3, :3], T[:, :3, 3])
            quad = np.einsum("ni,ij,nj->n", ev, W, ev)
            _check_finite(active, ev, "error twist")
            final_error[active] = 0.5 * quad

            done = 0.5 * quad <= params.tol
            feasible[active[done]] = True
            iterations[active[done]] = step
            keep = ~done
            active, qa, J, ev, quad = active[keep], qa[keep], J[keep], ev[keep], quad[keep]
            if active.size == 0:
                break

            if params.jacobian == "error":
                J = kernels.se3_left_jacobian_inv(ev) @ J
            J = np.where(locked[active][:, None, :], 0.0, J)
            JtW = np.swapaxes(J, -1, -2) @ W
            D = JtW @ J + (0.5 * (quad + params.delta))[:, None, None] * eye
            g = kernels.mv(JtW, ev)
            dq = np.linalg.solve(D, g[..., None])[..., 0]
            _check_finite(active, dq, "joint update")

            unclamped = qa + dq
            clamped = np.clip(unclamped, lo, hi)
            locked[active] = ((clamped == lo) & (unclamped < lo)) | ((clamped == hi) & (unclamped > hi))
            q[active] = clamped

    q_out = np.where(feasible[:, None], q, q_real)
    return BatchIkResult(q_out, feasible, iterations, final_error)


def _check_finite(active, values, what):
    bad = ~np.all(np.isfinite(values), axis=-1)
    if np.any(bad):
        raise NumericalFailure(f"non-finite {what} in case {int(active[np.argmax(bad)])}")


def solve_ik(model: RobotModel, case: IkCase, params: IkParams | None = None) -> IkResult:
    warm = model.check_q(case.warm_start, "warm_start")
    q_real = model.check_q(case.q_real, "q_real")
    return solve_ik_batch(model, [case.target], warm[None], q_real[None], params)[0]


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent stream for a subtask: SeedSequence([seed, *keys])."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *(int(k) for k in keys)]))


def draw_starts(model: RobotModel, q_real, restarts: int, rng: np.random.Generator, warm_start=None) -> np.ndarray:
    """Start configurations for one multistart solve: warm start, then random draws.

    All ``restarts`` draws are taken up front so the rng advances by the same
    amount whether or not an early attempt succeeds.
    """
    if restarts < 0:
        raise ValueError(f"restarts must be >= 0, got {restarts}")
    first = q_real if warm_start is None else warm_start
    starts = [model.check_q(first, "warm_start")]
    starts += [random_configuration(model, rng) for _ in range(restarts)]
    return np.array(starts)


def solve_ik_multistart(
    model: RobotModel,
    target: Pose,
    q_real,
    params: IkParams | None = None,
    restarts: int = 4,
    rng: np.random.Generator | None = None,
    warm_start=None,
) -> IkResult:
    """First feasible result over the warm start and ``restarts`` random starts."""
    rng = rng if rng is not None else np.random.default_rng(0)
    q_real = model.check_q(q_real, "q_real")
    starts = draw_starts(model, q_real, restarts, rng, warm_start)
    return solve_ik_multistart_batch(model, [target], q_real[None], starts[None], params)[0]


def solve_ik_multistart_batch(
    model: RobotModel,
    targets,
    q_real,
    starts,
    params: IkParams | None = None,
) -> BatchIkResult:
    """Multistart over N cases; ``starts`` is (N, attempts, n).

    Round k solves every case still infeasible from its k-th start. Cases that
    never succeed keep the failure record of their last attempt.
    """
    R_t, p_t = _stack_targets(targets)
    N = len(R_t)
    q_real = _check_joints(model, q_real, N, "q_real")
    starts = np.asarray(starts, dtype=float)
    if starts.ndim != 3 or starts.shape[0] != N or starts.shape[2] != model.dof or starts.shape[1] < 1:
        raise ValueError(f"starts has shape {starts.shape}, expected ({N}, attempts >= 1, {model.dof})")

    q = q_real.copy()
    feasible = np.zeros(N, dtype=bool)
    iterations = np.zeros(N, dtype=int)
    final_error = np.full(N, np.nan)
    pending = np.arange(N)
    for k in range(starts.shape[1]):
        if pending.size == 0:
            break
        res = solve_ik_batch(model, (R_t[pending], p_t[pending]), starts[pending, k], q_real[pending], params)
        q[pending] = res.q
        feasible[pending] = res.feasible
        iterations[pending] = res.iterations
        final_error[pending] = res.final_error
        pending = pending[~res.feasible]
    return BatchIkResult(q, feasible, iterations, final_error)
