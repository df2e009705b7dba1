"""Command-line front end: ``wbkin <subcommand> [options]``.

Every subcommand reads line-delimited JSON records (``-`` for stdin) and
writes records or text to stdout or ``--out``. Floats are printed with 17
significant digits. Exit status: 0 success, 1 input error, 2 numeric failure.

Seeding: ``--seed`` wins over the config file, which wins over the
``WBKIN_SEED`` environment variable; the fallback is 0. Record i of a batch
draws from ``SeedSequence([seed, i])``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import records
from .feasibility import GridSpec, TorsoState, feasibility_map, format_feasibility_map
from .ik import IkParams, NumericalFailure, derive_rng, draw_starts, solve_ik_batch, solve_ik_multistart_batch, translation_weight
from .metrics import AccuracySample, VelocitySample, ik_solution_rate, summarize
from .model import ModelError, forward_kinematics, pose_from_record, pose_to_record, resolve_model
from .observations import ACTOR_LAYOUT, CRITIC_LAYOUT, build_actor_obs, build_critic_obs, critic_aux_for
from .observations import NoiseModel, observation_record
from .planner import DEFAULT_RADIUS, DEFAULT_T_TOTAL, TrajectorySpec, generate_trajectory, sample_target
from .rewards import TERMS, RewardWeights, read_snapshot_log, total_reward
from .se3 import Pose

DEFAULTS = {
    "model": "z1_like",
    "seed": None,
    "tol": 1e-3,
    "max_iters": 10,
    "delta": 1e-3,
    "restarts": None,
    "weight": None,
    "jacobian": "error",
    "out": None,
    "dt": 0.02,
    "t_total": DEFAULT_T_TOTAL,
    "radius": DEFAULT_RADIUS,
}

FORMATS = """\
record formats (one JSON object per line):
  pose        {"position": [x, y, z], "quaternion": [w, x, y, z]}
  fk input    [q1, ..., qn]  or  {"q": [q1, ..., qn]}
  ik case     {"target": pose, "warm_start": [..], "q_real": [..]}
  ik result   {"q": [..], "feasible": bool, "iterations": int, "final_error": float}
  waypoint    {"t": float, "pose": pose, "twist": [6]}
  snapshot    RobotSnapshot fields by name; missing fields default to zero
  accuracy    {"target": pose, "achieved": pose}
  velocity    {"cmd_linear": [3], "measured_linear": [3], "cmd_angular": f, "measured_angular": f}
  ik-rate     {"torso": pose, "world_target": pose}
"""


class InputError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1 (status 2 is reserved for numeric failure)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _line_error(lineno, exc) -> InputError:
    return InputError(f"line {lineno}: {exc}")


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _resolve_seed(args, config) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    if "seed" in config:
        return int(config["seed"])
    env = os.environ.get("WBKIN_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"WBKIN_SEED={env!r} is not an integer") from None
    return 0


def _merge(args) -> dict:
    """Flags over config file over built-in defaults."""
    config = {}
    if getattr(args, "config", None):
        try:
            config = json.loads(_read_input(args.config))
        except json.JSONDecodeError as exc:
            raise InputError(f"config {args.config}: invalid JSON ({exc.msg})") from None
        if not isinstance(config, dict):
            raise InputError(f"config {args.config}: expected an object")
        unknown = set(config) - set(DEFAULTS)
        if unknown:
            raise InputError(f"config {args.config}: unknown keys {sorted(unknown)}")
    opts = {}
    for key, default in DEFAULTS.items():
        flag = getattr(args, key, None)
        opts[key] = flag if flag is not None else config.get(key, default)
    opts["seed"] = _resolve_seed(args, config)
    return opts


def _params(opts, model) -> IkParams:
    w = opts["weight"]
    if w is None:
        w = np.eye(6) if model.dof >= 6 else translation_weight()
    return IkParams(weight=w, delta=opts["delta"], max_iters=opts["max_iters"], tol=opts["tol"], jacobian=opts["jacobian"])


def _model(opts):
    try:
        return resolve_model(opts["model"])
    except OSError as exc:
        raise InputError(f"cannot read model {opts['model']}: {exc.strerror}") from None


def _pose_arg(text: str, what: str) -> Pose:
    try:
        return pose_from_record(json.loads(text), what)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what}: invalid JSON ({exc.msg})") from None


def _waypoint_record(w) -> dict:
    return {"t": w.t, "pose": pose_to_record(w.pose), "twist": w.twist}


def _ik_record(r) -> dict:
    return {"q": r.q, "feasible": r.feasible, "iterations": r.iterations, "final_error": r.final_error}


# Subcommands. Each returns the output text.


def cmd_fk(args, opts) -> str:
    model = _model(opts)
    out = []
    for lineno, rec in records.iter_records(_read_input(args.input)):
        q = rec.get("q") if isinstance(rec, dict) else rec
        try:
            T = forward_kinematics(model, np.array(q, dtype=float))
        except (ValueError, TypeError) as exc:
            raise _line_error(lineno, exc) from None
        out.append(pose_to_record(T))
    return records.dump_lines(out)


def _parse_ik_cases(text, model):
    targets, warm, real = [], [], []
    for lineno, rec in records.iter_records(text):
        try:
            if not isinstance(rec, dict) or set(rec) != {"target", "warm_start", "q_real"}:
                raise ValueError("expected keys target, warm_start, q_real")
            targets.append(pose_from_record(rec["target"], "target"))
            warm.append(model.check_q(np.array(rec["warm_start"], dtype=float), "warm_start"))
            real.append(model.check_q(np.array(rec["q_real"], dtype=float), "q_real"))
        except (ValueError, TypeError) as exc:
            raise _line_error(lineno, exc) from None
    if not targets:
        raise InputError("no ik cases in input")
    return targets, np.array(warm), np.array(real)


def cmd_ik(args, opts) -> str:
    model = _model(opts)
    params = _params(opts, model)
    targets, warm, real = _parse_ik_cases(_read_input(args.input), model)
    restarts = opts["restarts"] or 0
    if restarts == 0:
        res = solve_ik_batch(model, targets, warm, real, params)
    else:
        starts = np.array([draw_starts(model, real[i], restarts, derive_rng(opts["seed"], i), warm[i]) for i in range(len(targets))])
        res = solve_ik_multistart_batch(model, targets, real, starts, params)
    return records.dump_lines(_ik_record(res[i]) for i in range(len(res)))


def cmd_plan(args, opts) -> str:
    start = _pose_arg(args.start, "--start") if args.start else Pose.identity()
    if args.end:
        end = _pose_arg(args.end, "--end")
    else:
        end = sample_target(derive_rng(opts["seed"], 0), center=start, radius=opts["radius"])
    spec = TrajectorySpec(start, end, opts["t_total"])
    return records.dump_lines(_waypoint_record(w) for w in generate_trajectory(spec, opts["dt"]))


def cmd_feasmap(args, opts) -> str:
    model = _model(opts)
    params = _params(opts, model)
    grid = GridSpec(args.lower, args.upper, args.resolution)
    rotation = Pose.from_quaternion(np.zeros(3), args.rotation).rotation
    torso = TorsoState(_pose_arg(args.torso, "--torso") if args.torso else Pose.identity())
    restarts = 4 if opts["restarts"] is None else opts["restarts"]
    fmap = feasibility_map(model, torso, grid, rotation, params, restarts, opts["seed"])
    return format_feasibility_map(fmap, grid, opts["seed"], rotation)


def _load_weights(path):
    if path is None:
        return RewardWeights()
    try:
        return RewardWeights.from_mapping(json.loads(_read_input(path)))
    except (json.JSONDecodeError, TypeError, ValueError) as exc:
        raise InputError(f"weights {path}: {exc}") from None


def cmd_reward(args, opts) -> str:
    weights = _load_weights(args.weights)
    model = resolve_model(args.model) if args.model else None
    snaps = read_snapshot_log(_read_input(args.input))
    out, terms, weighted, totals = [], [], [], []
    for lineno, s in enumerate(snaps, start=1):
        b = total_reward(s, weights, model, literal_exponents=args.literal_exponents)
        out.append({"index": lineno - 1, "terms": b.terms, "weighted": b.weighted, "total": b.total})
        terms.append([b.terms[k] for k in TERMS])
        weighted.append([b.weighted[k] for k in TERMS])
        totals.append(b.total)
    if snaps:
        mt, mw = np.mean(terms, axis=0), np.mean(weighted, axis=0)
        out.append(
            {
                "aggregate": "mean",
                "count": len(snaps),
                "terms": dict(zip(TERMS, mt)),
                "weighted": dict(zip(TERMS, mw)),
                "total": float(np.mean(totals)),
            }
        )
    return records.dump_lines(out)


def _classify_samples(paths):
    accuracy, velocity, cases = [], [], []
    for path in paths:
        for lineno, rec in records.iter_records(_read_input(path)):
            try:
                if not isinstance(rec, dict):
                    raise ValueError("expected an object")
                keys = set(rec)
                if keys == {"target", "achieved"}:
                    accuracy.append(AccuracySample(pose_from_record(rec["target"], "target"), pose_from_record(rec["achieved"], "achieved")))
                elif keys == {"cmd_linear", "measured_linear", "cmd_angular", "measured_angular"}:
                    velocity.append(
                        VelocitySample(rec["cmd_linear"], rec["measured_linear"], float(rec["cmd_angular"]), float(rec["measured_angular"]))
                    )
                elif keys == {"torso", "world_target"}:
                    cases.append((TorsoState(pose_from_record(rec["torso"], "torso")), pose_from_record(rec["world_target"], "world_target")))
                else:
                    raise ValueError(f"unrecognized sample keys {sorted(keys)}")
            except (ValueError, TypeError) as exc:
                raise InputError(f"{path} line {lineno}: {exc}") from None
    return accuracy, velocity, cases


def cmd_metrics(args, opts) -> str:
    accuracy, velocity, cases = _classify_samples(args.inputs)
    if not (accuracy or velocity or cases):
        raise InputError("no samples in input")
    rate = None
    if cases:
        model = _model(opts)
        restarts = 4 if opts["restarts"] is None else opts["restarts"]
        rate = ik_solution_rate(cases, model, _params(opts, model), restarts, opts["seed"])
    return records.dump_lines([summarize(accuracy, velocity, rate, p=args.percentile)])


def cmd_layout(args, opts) -> str:
    lines = ["kind\tname\toffset\tlength"]
    for kind, layout in (("actor", ACTOR_LAYOUT), ("critic", CRITIC_LAYOUT)):
        lines += [f"{kind}\t{name}\t{off}\t{n}" for name, off, n in layout.table()]
        lines.append(f"{kind}\ttotal\t0\t{layout.size}")
    return "\n".join(lines) + "\n"


def cmd_obs(args, opts) -> str:
    snaps = read_snapshot_log(_read_input(args.input))
    noise = NoiseModel(*args.noise, delay_steps=args.delay) if args.noise else NoiseModel.zero(args.delay)
    out = []
    for i, s in enumerate(snaps):
        history = snaps[max(0, i - args.delay) : i]
        if len(history) < args.delay:
            continue
        rng = derive_rng(opts["seed"], i)
        out.append(observation_record("actor", build_actor_obs(s, history, noise, rng)))
        out.append(observation_record("critic", build_critic_obs(s, critic_aux_for(s))))
    return records.dump_lines(out)


# Parser.


def _add_common(p, model=True, ik=False, seed=True):
    g = p.add_argument_group("common options")
    if model:
        g.add_argument("--model", help="bundled model name (planar_2r, z1_like) or model file path (default: z1_like)")
    if seed:
        g.add_argument("--seed", type=int, help="master seed (default: $WBKIN_SEED, else 0)")
    g.add_argument("--out", help="output file (default: stdout)")
    g.add_argument("--config", help="JSON file of option defaults; flags win")
    if ik:
        h = p.add_argument_group("solver options")
        h.add_argument("--tol", type=float, help="success threshold on 0.5 e^T We e (default: 1e-3)")
        h.add_argument("--max-iters", type=int, dest="max_iters", help="iteration cap (default: 10)")
        h.add_argument("--delta", type=float, help="damping offset (default: 1e-3)")
        h.add_argument("--restarts", type=int, help="random restarts after the warm start")
        h.add_argument(
            "--weight",
            type=float,
            nargs=6,
            metavar="W",
            help="diagonal of We, (angular, linear) order (default: identity for 6+ joints, "
            "1e-6 angular / 100 linear otherwise)",
        )
        h.add_argument("--jacobian", choices=("error", "body"), help="solver Jacobian (default: error)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="wbkin",
        description="Kinematic feasibility tools for legged manipulators.",
        epilog=FORMATS + "\nexit status: 0 ok, 1 input error, 2 numeric failure",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, help_text, func, epilog):
        p = sub.add_parser(name, help=help_text, description=help_text, epilog=epilog, formatter_class=argparse.RawDescriptionHelpFormatter)
        p.set_defaults(func=func)
        return p

    p = add("fk", "forward kinematics for each joint vector", cmd_fk, "input: fk input lines\noutput: one pose per line")
    p.add_argument("input", help="joint vectors, one per line ('-' for stdin)")
    _add_common(p, seed=False)

    p = add(
        "ik",
        "solve IK cases",
        cmd_ik,
        "input: ik case lines (target in the arm-base frame)\noutput: one ik result per line\n"
        "restarts default to 0; case i draws restarts from SeedSequence([seed, i])",
    )
    p.add_argument("input", help="ik cases, one per line ('-' for stdin)")
    _add_common(p, ik=True)

    p = add(
        "plan",
        "sample a reference trajectory",
        cmd_plan,
        "output: one waypoint per line at t = 0, dt, ..., t_total\n"
        "without --end the goal is sampled in a ball of --radius around --start",
    )
    p.add_argument("--start", help="start pose record (default: identity)")
    p.add_argument("--end", help="end pose record (default: sampled)")
    p.add_argument("--dt", type=float, help="waypoint spacing in s (default: 0.02)")
    p.add_argument("--t-total", type=float, dest="t_total", help="duration in s (default: 3.0)")
    p.add_argument("--radius", type=float, help="goal sampling radius in m (default: 1.0)")
    _add_common(p, model=False)

    p = add(
        "feasmap",
        "feasibility map over a world-frame box",
        cmd_feasmap,
        "output: JSON header line, then per z slice one line per x listing y nodes as 0/1\n"
        "node k draws restarts from SeedSequence([seed, k]); restarts default to 4",
    )
    p.add_argument("--lower", type=float, nargs=3, required=True, metavar="X", help="box lower corner")
    p.add_argument("--upper", type=float, nargs=3, required=True, metavar="X", help="box upper corner")
    p.add_argument("--resolution", type=int, nargs=3, required=True, metavar="N", help="nodes per axis")
    p.add_argument("--rotation", type=float, nargs=4, default=[1.0, 0.0, 0.0, 0.0], metavar="Q", help="target quaternion w x y z (default: identity)")
    p.add_argument("--torso", help="torso pose record in the world (default: identity)")
    _add_common(p, ik=True)

    p = add(
        "reward",
        "reward breakdown per snapshot",
        cmd_reward,
        "input: snapshot lines\noutput: one breakdown per line, then a mean aggregate record\n"
        "the joint-limit term counts arm joints only when --model is given",
    )
    p.add_argument("input", help="snapshot log ('-' for stdin)")
    p.add_argument("--weights", help="JSON object of term weights (default: built-in table)")
    p.add_argument("--model", help="arm model for the joint-limit term (default: none)")
    p.add_argument("--literal-exponents", action="store_true", help="use exp(+error) tracking terms")
    _add_common(p, model=False, seed=False)

    p = add(
        "metrics",
        "summary metrics from sample logs",
        cmd_metrics,
        "input: accuracy, velocity and ik-rate lines, in any mix\n"
        "output: {pe_p60, re_p60, lvte_mean, lvte_std, avte_mean, avte_std, ik_rate}; absent groups are null",
    )
    p.add_argument("inputs", nargs="+", help="sample files ('-' for stdin)")
    p.add_argument("--percentile", type=float, default=60.0, help="nearest-rank percentile for PE/RE (default: 60)")
    _add_common(p, ik=True)

    p = add("layout", "print observation layouts", cmd_layout, "output: tab-separated kind, name, offset, length")
    _add_common(p, model=False, seed=False)

    p = add(
        "obs",
        "dump actor and critic observations per snapshot",
        cmd_obs,
        "input: snapshot lines\noutput: {kind, values} lines, actor then critic per snapshot\n"
        "snapshot i draws noise from SeedSequence([seed, i]); the first --delay snapshots are skipped",
    )
    p.add_argument("input", help="snapshot log ('-' for stdin)")
    p.add_argument("--noise", type=float, nargs=4, metavar="STD", help="stds for joint pos, joint vel, body twist, ee pose (default: none)")
    p.add_argument("--delay", type=int, default=0, help="observation delay in steps (default: 0)")
    _add_common(p, model=False)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = _merge(args)
        text = args.func(args, opts)
    except NumericalFailure as exc:
        print(f"wbkin {args.command}: numeric failure: {exc}", file=sys.stderr)
        return 2
    except (InputError, ModelError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) else exc
        print(f"wbkin {args.command}: {msg}", file=sys.stderr)
        return 1
    if opts["out"]:
        with open(opts["out"], "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
