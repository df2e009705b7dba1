"""Print the planar 2R feasibility map next to its closed-form reach disk.

    python demos/feasibility_map.py
"""

import numpy as np

from wbkin.feasibility import GridSpec, TorsoState, feasibility_map
from wbkin.ik import IkParams, translation_weight
from wbkin.model import bundled_model
from wbkin.se3 import Pose


def main():
    model = bundled_model("planar_2r")
    grid = GridSpec([-2.4, -2.4, 0.0], [2.4, 2.4, 0.0], (25, 25, 1))
    fmap = feasibility_map(model, TorsoState(Pose.identity()), grid, np.eye(3), IkParams(weight=translation_weight()), seed=0)
    nodes = grid.nodes().reshape(25, 25, 3)
    disk = np.hypot(nodes[..., 0], nodes[..., 1]) <= 2.0
    print("solver map (#) vs closed-form reach (.)")
    for ix in range(25):
        left = "".join("#" if v else " " for v in fmap[ix, :, 0])
        right = "".join("." if v else " " for v in disk[ix])
        print(f"{left}   {right}")
    print(f"agreement: {np.mean(fmap[..., 0] == disk):.3f}")


if __name__ == "__main__":
    main()
