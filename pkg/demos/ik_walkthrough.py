"""Solve IK for random reachable poses of the 6-joint arm and show convergence.

    python demos/ik_walkthrough.py
"""

import numpy as np

from wbkin.ik import IkCase, IkParams, derive_rng, solve_ik, solve_ik_multistart
from wbkin.model import bundled_model, forward_kinematics, random_configuration
from wbkin.se3 import pose_diff


def main():
    model = bundled_model("z1_like")
    rng = derive_rng(0, 1)
    params = IkParams()
    print(f"model {model.name}: {model.dof} joints")
    for k in range(5):
        q_goal = random_configuration(model, rng)
        target = forward_kinematics(model, q_goal)
        warm = np.clip(q_goal + rng.normal(scale=0.2, size=model.dof), model.q_min, model.q_max)
        res = solve_ik(model, IkCase(target, warm, np.zeros(model.dof)), params)
        err = np.linalg.norm(pose_diff(target, forward_kinematics(model, res.q)))
        print(f"case {k}: feasible={res.feasible} iters={res.iterations} |e|={err:.2e}")

    # a cold start from the zero configuration usually needs restarts
    q_goal = random_configuration(model, rng)
    target = forward_kinematics(model, q_goal)
    for restarts in (0, 4, 16):
        res = solve_ik_multistart(model, target, np.zeros(model.dof), params, restarts, derive_rng(0, 2))
        print(f"cold start, {restarts:2d} restarts: feasible={res.feasible}")


if __name__ == "__main__":
    main()
