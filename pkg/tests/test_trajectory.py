import numpy as np
import pytest

from siqnet.trajectory import HEADER, Trajectory, mean_trajectory, sample_grid


def test_csv_round_trip(tmp_path):
    vals = np.random.default_rng(1).dirichlet(np.ones(6), 4)
    tr = Trajectory([0, 1, 2, 2.5], vals)
    path = tmp_path / "t.csv"
    text = tr.to_csv(path, comment="a=1\nseed=2")
    assert text.splitlines()[:3] == ["# a=1", "# seed=2", HEADER]
    back = Trajectory.from_csv(path)
    np.testing.assert_allclose(back.values, vals, rtol=1e-11)
    np.testing.assert_allclose(back.times, tr.times)


def test_accessors():
    tr = Trajectory([0, 1], [[0.5, 0.1, 0.1, 0.2, 0.05, 0.05], [0.6, 0, 0, 0.4, 0, 0]], eradication_time=0.7)
    assert tr.column("I_v")[0] == 0.05
    np.testing.assert_allclose(tr.infected, [0.3, 0.0])
    assert tr.eradicated and len(tr) == 2


def test_mean_requires_common_grid():
    a = Trajectory([0, 1], np.ones((2, 6)))
    b = Trajectory([0, 2], np.ones((2, 6)))
    with pytest.raises(ValueError):
        mean_trajectory([a, b])
    np.testing.assert_allclose(mean_trajectory([a, a]).values, 1.0)


def test_sample_grid():
    np.testing.assert_allclose(sample_grid(10, 2.5), [0, 2.5, 5, 7.5, 10])
    np.testing.assert_allclose(sample_grid(1, 0.3), [0, 0.3, 0.6, 0.9, 1.0])
    with pytest.raises(ValueError):
        sample_grid(0, 1)
