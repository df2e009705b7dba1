import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wbkin.feasibility import TorsoState
from wbkin.metrics import (
    AccuracySample,
    VelocitySample,
    ik_solution_rate,
    percentile,
    pose_errors,
    summarize,
    velocity_tracking_errors,
)
from wbkin.model import forward_kinematics, random_configuration
from wbkin.se3 import Pose, rot_z, sample_uniform_rotation


def test_percentile_examples():
    assert percentile(range(1, 11), 60) == 6
    assert percentile([3.0, -1.0, 7.5], 100) == 7.5
    assert percentile([4.2], 1) == 4.2
    assert percentile([4.2], 100) == 4.2
    assert percentile([1, 2, 3, 4], 25) == 1
    assert percentile([1, 2, 3, 4], 25.000001) == 2


def test_percentile_errors():
    with pytest.raises(ValueError):
        percentile([], 50)
    with pytest.raises(ValueError):
        percentile([1.0], 0)
    with pytest.raises(ValueError):
        percentile([1.0], 101)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=1000), st.integers(1, 100))
def test_percentile_matches_sort_index(values, p):
    k = -(-p * len(values) // 100)
    assert percentile(values, p) == sorted(values)[k - 1]


def test_pose_errors():
    rng = np.random.default_rng(0)
    T = Pose(sample_uniform_rotation(rng), [1, 2, 3])
    pe, re = pose_errors([AccuracySample(T, T)])
    assert pe[0] == 0 and re[0] < 1e-7
    pe, re = pose_errors([AccuracySample(T, Pose(T.rotation, T.translation + [0.087, 0, 0]))])
    assert abs(pe[0] - 0.087) < 1e-12
    pe, re = pose_errors([AccuracySample(T, Pose(T.rotation @ rot_z(0.18), T.translation))])
    assert abs(re[0] - 0.18) < 1e-12
    with pytest.raises(ValueError):
        pose_errors([])


def test_pose_errors_range(rng):
    samples = [AccuracySample(Pose(sample_uniform_rotation(rng), rng.normal(size=3)),
                              Pose(sample_uniform_rotation(rng), rng.normal(size=3))) for _ in range(200)]
    pe, re = pose_errors(samples)
    assert np.all(pe >= 0) and np.all(re >= 0) and np.all(re <= np.pi)


def test_velocity_errors():
    perfect = [VelocitySample([1, 0, 0], [1, 0, 0], 0.2, 0.2)] * 3
    assert velocity_tracking_errors(perfect) == {"lvte_mean": 0.0, "lvte_std": 0.0, "avte_mean": 0.0, "avte_std": 0.0}
    const = [VelocitySample([0.43, 0, 0], [0, 0, 0], 0.0, 0.0)] * 5
    r = velocity_tracking_errors(const)
    assert np.isclose(r["lvte_mean"], 0.43) and r["lvte_std"] == pytest.approx(0.0, abs=1e-15)
    two = [VelocitySample([0, 0, 0], [0, 0, 0], 0.0, 0.0), VelocitySample([0, 2, 0], [0, 0, 0], 1.0, -1.0)]
    r = velocity_tracking_errors(two)
    assert r["lvte_mean"] == 1.0 and r["lvte_std"] == 1.0
    assert r["avte_mean"] == 1.0 and r["avte_std"] == 1.0
    with pytest.raises(ValueError):
        velocity_tracking_errors([])


def test_velocity_sample_validation():
    with pytest.raises(ValueError):
        VelocitySample([0, 0], [0, 0, 0], 0.0, 0.0)
    with pytest.raises(ValueError):
        VelocitySample([0, 0, np.inf], [0, 0, 0], 0.0, 0.0)


def _fk_cases(model, rng, n):
    cases = []
    for _ in range(n):
        torso = TorsoState(Pose(sample_uniform_rotation(rng), rng.uniform(-1, 1, 3)))
        q = random_configuration(model, rng)
        cases.append((torso, torso.pose_in_world @ model.mount_in_body @ forward_kinematics(model, q)))
    return cases


def test_ik_rate_constructed(arm6):
    rng = np.random.default_rng(5)
    reach = _fk_cases(arm6, rng, 200)
    assert ik_solution_rate(reach, arm6, restarts=16) >= 0.99
    far = [(TorsoState(Pose.identity()), Pose(np.eye(3), [10.0, 0, 0]))] * 20
    assert ik_solution_rate(far, arm6) == 0.0
    mixed = reach[:100] + [(t, Pose(w.rotation, w.translation + 10.0)) for t, w in reach[100:]]
    assert abs(ik_solution_rate(mixed, arm6, restarts=16) - 0.5) <= 0.01


def test_ik_rate_order_invariant(arm6):
    cases = _fk_cases(arm6, np.random.default_rng(6), 60)
    a = ik_solution_rate(cases, arm6, seed=3)
    perm = np.random.default_rng(1).permutation(len(cases))
    b = ik_solution_rate([cases[i] for i in perm], arm6, seed=3)
    assert a == b
    with pytest.raises(ValueError):
        ik_solution_rate([], arm6)


def test_summarize():
    T = Pose.identity()
    s = summarize([AccuracySample(T, T)], [VelocitySample([0, 0, 0], [0, 0, 0], 0.0, 0.0)], 1.0)
    assert s == {"pe_p60": 0.0, "re_p60": 0.0, "lvte_mean": 0.0, "lvte_std": 0.0,
                 "avte_mean": 0.0, "avte_std": 0.0, "ik_rate": 1.0}
    assert summarize()["pe_p60"] is None
