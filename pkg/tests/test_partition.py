import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridml.partition import (LabeledSample, TreeConfig, bounding_box, extract_partition,
                                fit_regression_tree)


def _grow(u, y, config=TreeConfig()):
    tree = fit_regression_tree(u, y, config)
    return tree, extract_partition(tree, bounding_box(u))


def test_step_function_is_split_once():
    u = np.linspace(0, 1, 100)[:, None]
    y = np.where(u[:, 0] <= 0.5, 0.0, 1.0)
    tree, part = _grow(u, y)
    assert len(part) == 2
    assert tree.root.axis == 0
    # midpoint between the last left sample and the first right sample
    assert tree.root.threshold == pytest.approx(0.5 * (u[49, 0] + u[50, 0]))
    assert part.cells[0].upper[0] == part.cells[1].lower[0] == tree.root.threshold


def test_constant_response_is_not_split(np_rng):
    u = np_rng.uniform(size=(200, 3))
    _, part = _grow(u, np.full(200, 2.5))
    assert len(part) == 1
    assert np.array_equal(part.cells[0].lower, u.min(axis=0))


def test_min_bucket_and_min_split(np_rng):
    u = np_rng.uniform(size=(300, 2))
    y = np.sin(6 * u[:, 0]) + u[:, 1] ** 2 + 0.01 * np_rng.standard_normal(300)
    tree, part = _grow(u, y, TreeConfig(min_split=20, min_bucket=7, cp=0.0))
    assert min(c.members.size for c in part) >= 7
    for node in [tree.root]:
        stack = [node]
        while stack:
            n = stack.pop()
            if not n.is_leaf:
                assert n.members.size >= 20
                stack += [n.left, n.right]


def test_cp_controls_growth(np_rng):
    u = np_rng.uniform(size=(400, 2))
    y = u[:, 0] + 0.3 * u[:, 1]
    small = len(_grow(u, y, TreeConfig(cp=0.05))[1])
    large = len(_grow(u, y, TreeConfig(cp=0.001))[1])
    assert small < large


def test_depth_limit(np_rng):
    u = np_rng.uniform(size=(500, 2))
    tree, part = _grow(u, u[:, 0] * u[:, 1], TreeConfig(max_depth=2, cp=0.0))
    assert tree.depth <= 2 and len(part) <= 4


def test_threshold_ties_go_left():
    u = np.array([[0.0]] * 10 + [[1.0]] * 10)
    y = np.r_[np.zeros(10), np.ones(10)]
    tree, part = _grow(u, y, TreeConfig(min_split=2, min_bucket=1))
    assert tree.predict([[0.5]])[0] == 0.0
    assert tree.predict([[0.500001]])[0] == 1.0


def test_labeled_samples_match_arrays(np_rng):
    u = np_rng.uniform(size=(60, 2))
    y = u[:, 0] ** 2
    a = fit_regression_tree(u, y)
    b = fit_regression_tree([LabeledSample(r, v) for r, v in zip(u, y)])
    assert np.array_equal(a.predict(u), b.predict(u))


def test_invalid_inputs():
    with pytest.raises(ValueError, match="degenerate"):
        bounding_box(np.array([[0.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(ValueError):
        fit_regression_tree(np.zeros((3, 1)), [0.0, np.nan, 1.0])
    with pytest.raises(ValueError):
        TreeConfig(min_bucket=0)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4), st.integers(20, 300))
def test_partition_audit(seed, d, n):
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((n, d)) * rng.uniform(0.1, 10, size=d)
    y = np.sum(u ** 2, axis=1) + rng.standard_normal(n)
    tree, part = _grow(u, y, TreeConfig(min_split=10, min_bucket=3, cp=0.001))
    box = part.box
    # cells tile the box: volumes add up and every cell lies inside it
    vol = sum(c.volume for c in part)
    assert abs(vol - box.volume) <= 1e-12 * box.volume
    for c in part:
        assert np.all(c.lower >= box.lower) and np.all(c.upper <= box.upper)
        assert np.all(c.upper > c.lower)
    # every sample is owned by exactly one leaf and that leaf's cell contains it
    owner = part.membership(n)
    assert np.all(owner >= 0)
    assert sum(c.members.size for c in part) == n
    for k, c in enumerate(part):
        assert np.all(c.contains(u[c.members]))
        assert np.allclose(tree.predict(u[c.members]), c.leaf_mean)
    # disjoint interiors: a cell's centre lies in no other cell
    for k, c in enumerate(part):
        centre = 0.5 * (c.lower + c.upper)
        hits = [j for j, o in enumerate(part) if o.contains(centre)[0]]
        assert hits == [k]


def test_dump_lists_one_line_per_cell(np_rng):
    u = np_rng.uniform(size=(100, 2))
    _, part = _grow(u, u[:, 0])
    lines = part.dump().splitlines()
    assert len(lines) == len(part)
    assert len(lines[0].split()) == 2 * 2 + 2
