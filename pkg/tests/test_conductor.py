import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from greedy_energy.conductor import (ball_grid, box_grid, interval_grid, load_points,
                                     save_points, sphere_points)


def test_interval_examples():
    c = interval_grid(-1, 1, 5)
    np.testing.assert_array_equal(c.points[:, 0], [-1, -0.5, 0, 0.5, 1])
    assert c.mesh_scale == 0.5
    c = interval_grid(0, 1, 2)
    np.testing.assert_array_equal(c.points[:, 0], [0, 1])
    assert c.mesh_scale == 1
    c = interval_grid(-1, 1, 2001)
    assert len(c) == 2001 and c.mesh_scale == pytest.approx(0.001)


@pytest.mark.parametrize("a, b, M", [(1, 1, 5), (2, 1, 5), (0, 1, 1)])
def test_interval_errors(a, b, M):
    with pytest.raises(ValueError):
        interval_grid(a, b, M)


@given(st.floats(0.1, 100), st.integers(2, 500))
def test_interval_symmetric(c, M):
    x = interval_grid(-c, c, M).points[:, 0]
    np.testing.assert_array_equal(np.sort(-x), x)


def test_box_examples():
    c = box_grid([0, 0], [1, 1], 3)
    assert len(c) == 9
    assert any((p == [0.5, 0.5]).all() for p in c.points)
    c = box_grid([0, 0], [1, 1], 2)
    assert {tuple(p) for p in c.points} == {(0, 0), (0, 1), (1, 0), (1, 1)}
    c = box_grid([0, 0], [1, 1], 101)
    assert len(c) == 10201 and c.mesh_scale == pytest.approx(0.01)


def test_box_degenerate():
    with pytest.raises(ValueError):
        box_grid([0, 0], [1, 0], 3)


def test_ball_examples():
    c = ball_grid(1.0, 2, 3)
    assert {tuple(p) for p in c.points} == {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}
    with pytest.raises(ValueError):
        ball_grid(1.0, 2, 2)


def test_ball_count_matches_direct_filter():
    axis = np.linspace(-1, 1, 21)
    count = sum(1 for p in itertools.product(axis, repeat=3) if np.dot(p, p) <= 1 + 1e-12)
    c = ball_grid(1.0, 3, 21)
    assert len(c) == count
    assert (np.linalg.norm(c.points, axis=1) <= 1 + 1e-12).all()


def test_sphere_examples():
    c = sphere_points(3, 4)
    np.testing.assert_allclose(np.linalg.norm(c.points, axis=1), 1, atol=1e-12)
    c = sphere_points(3, 100)
    assert len(c) == 100 and c.mesh_scale > 0
    assert np.linalg.norm(c.points.mean(axis=0)) <= 0.05
    with pytest.raises(ValueError):
        sphere_points(2, 100)


def test_load_points(tmp_path):
    f = tmp_path / "a.csv"
    f.write_text("-1\n0\n1\n")
    c = load_points(f)
    assert c.dimension == 1 and len(c) == 3 and c.mesh_scale == 1
    f.write_text("0,0\n1,0\n")
    c = load_points(f)
    assert c.dimension == 2 and c.mesh_scale == 1
    f.write_text("0,0\n0,0\n")
    with pytest.raises(ValueError, match="distinct"):
        load_points(f)
    f.write_text("0,0\n1\n")
    with pytest.raises(ValueError, match="columns"):
        load_points(f)
    f.write_text("0,0\n1,x\n")
    with pytest.raises(ValueError, match=":2"):
        load_points(f)


@pytest.mark.parametrize("cand", [interval_grid(-1, 1, 17), box_grid([0, 0], [1, 1], 5),
                                  sphere_points(3, 30)])
def test_save_load_round_trip(tmp_path, cand):
    f = tmp_path / "p.csv"
    save_points(f, cand.points)
    back = load_points(f)
    np.testing.assert_array_equal(back.points, cand.points)
    assert back.mesh_scale == pytest.approx(cand.mesh_scale, rel=1e-9)


@pytest.mark.parametrize("cand", [interval_grid(-2, 3, 7), box_grid([0, 0, 0], [1, 2, 3], 4),
                                  ball_grid(0.7, 3, 9), sphere_points(3, 50)])
def test_generated_sets_respect_invariants(cand):
    assert np.unique(cand.points, axis=0).shape[0] >= 2
    assert 0 < cand.mesh_scale <= cand.diameter()
    assert cand.points.shape[1] == cand.dimension
