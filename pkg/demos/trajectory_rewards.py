"""Plan a pose trajectory, track it with IK and score each step.

    python demos/trajectory_rewards.py
"""

import numpy as np

from wbkin.feasibility import TorsoState, feasible_state
from wbkin.ik import IkResult, derive_rng
from wbkin.metrics import AccuracySample, summarize
from wbkin.model import bundled_model, forward_kinematics
from wbkin.observations import build_actor_obs, build_critic_obs, critic_aux_for
from wbkin.planner import TrajectorySpec, generate_trajectory
from wbkin.rewards import RobotSnapshot, total_reward
from wbkin.se3 import Pose, rot_z


def main():
    model = bundled_model("z1_like")
    torso = TorsoState(Pose(np.eye(3), [0.0, 0.0, 0.4]))
    home = torso.pose_in_world @ model.mount_in_body @ model.home_pose
    goal = Pose(rot_z(0.3) @ home.rotation, home.translation + [-0.05, 0.08, 0.03])
    waypoints = generate_trajectory(TrajectorySpec(home, goal, 2.0), 0.25)

    q_arm = np.zeros(model.dof)
    samples = []
    for k, w in enumerate(waypoints):
        out = feasible_state(torso, w.pose, model, warm_start=q_arm, restarts=4, rng=derive_rng(0, k))
        q_arm = out.q_ideal
        achieved = torso.pose_in_world @ model.mount_in_body @ forward_kinematics(model, q_arm)
        samples.append(AccuracySample(w.pose, achieved))
        joint_q = np.concatenate([np.zeros(12), q_arm])
        snap = RobotSnapshot(cmd_pose=w.pose, ee_pose=achieved, joint_q=joint_q, ik_result=IkResult(q_arm, out.feasible, out.iterations, out.final_error))
        b = total_reward(snap)
        actor, critic = build_actor_obs(snap), build_critic_obs(snap, critic_aux_for(snap))
        print(f"t={w.t:4.2f} feasible={out.feasible} reward={b.total:.3f} obs={actor.size}/{critic.size}")
    s = summarize(samples)
    print(f"PE p60 {s['pe_p60']:.2e} m, RE p60 {s['re_p60']:.2e} rad")


if __name__ == "__main__":
    main()
