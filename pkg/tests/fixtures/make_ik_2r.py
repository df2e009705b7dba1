"""Regenerate the planar 2R IK fixtures.

Cases are built from the closed-form 2R solution: reachable targets come
from an elbow angle and a base angle, unreachable ones sit outside radius 2.
Run from the repository root:

    python tests/fixtures/make_ik_2r.py
    wbkin ik --model planar_2r --restarts 4 --seed 7 tests/fixtures/ik_2r_cases.jsonl --out tests/fixtures/ik_2r_golden.jsonl
"""

import json
from pathlib import Path

import numpy as np

HERE = Path(__file__).parent


def quat_z(a):
    return [float(np.cos(a / 2)), 0.0, 0.0, float(np.sin(a / 2))]


def main():
    rng = np.random.default_rng(20240611)
    lines = []
    for i in range(40):
        q_real = rng.uniform(-np.pi, np.pi, 2)
        if i % 4 == 3:
            r = rng.uniform(2.1, 3.0)
            a = rng.uniform(-np.pi, np.pi)
            pos, yaw, warm = [r * np.cos(a), r * np.sin(a), 0.0], a, q_real
        else:
            q = rng.uniform(-3.0, 3.0, 2)
            pos = [np.cos(q[0]) + np.cos(q[0] + q[1]), np.sin(q[0]) + np.sin(q[0] + q[1]), 0.0]
            yaw = q[0] + q[1]
            warm = np.clip(q + rng.uniform(-0.3, 0.3, 2), -np.pi, np.pi)
        rec = {
            "target": {"position": [float(v) for v in pos], "quaternion": quat_z(yaw)},
            "warm_start": warm.tolist(),
            "q_real": q_real.tolist(),
        }
        lines.append(json.dumps(rec))
    (HERE / "ik_2r_cases.jsonl").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
