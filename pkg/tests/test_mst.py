import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from physarum_routing.mst import mst_edges, mst_length


def prufer_trees(n):
    """Every labelled tree on n nodes, decoded from its Pruefer sequence."""
    if n == 2:
        yield [(0, 1)]
        return
    for seq in itertools.product(range(n), repeat=n - 2):
        degree = [1] * n
        for v in seq:
            degree[v] += 1
        edges = []
        for v in seq:
            leaf = min(i for i in range(n) if degree[i] == 1)
            edges.append((leaf, v))
            degree[leaf] -= 1
            degree[v] -= 1
        u, w = [i for i in range(n) if degree[i] == 1]
        edges.append((u, w))
        yield edges


def brute_force_mst(points):
    pts = [tuple(map(float, p)) for p in points]
    best = math.inf
    for edges in prufer_trees(len(pts)):
        total = math.fsum(math.dist(pts[min(i, j)], pts[max(i, j)]) for i, j in edges)
        best = min(best, total)
    return best


def test_pruefer_enumeration_counts():
    for n in range(2, 7):
        trees = {frozenset(frozenset(e) for e in t) for t in prufer_trees(n)}
        assert len(trees) == n ** (n - 2)


def test_two_points():
    assert mst_length([(0, 0), (3, 4)]) == 5.0


def test_square_corners():
    assert mst_length([(0, 0), (10, 0), (10, 10), (0, 10)]) == 30.0


def test_errors():
    with pytest.raises(ValueError):
        mst_length([(0, 0)])
    with pytest.raises(ValueError):
        mst_length([(0, 0, 0), (1, 1, 1)])
    with pytest.raises(ValueError):
        mst_length([(i, 0) for i in range(9)])


@pytest.mark.parametrize("n,count", [(4, 100), (5, 20)])
def test_matches_brute_force_exactly(n, count):
    rng = np.random.default_rng(1234 + n)
    for _ in range(count):
        pts = rng.uniform(0, 90, size=(n, 2))
        assert mst_length(pts) == brute_force_mst(pts)


def test_edges_form_spanning_tree():
    pts = np.random.default_rng(3).uniform(0, 10, size=(7, 2))
    edges = mst_edges(pts)
    assert len(edges) == 6
    seen = {0}
    for i, j, _ in edges:
        assert i in seen
        seen.add(j)
    assert seen == set(range(7))


coords = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(coords, coords), min_size=2, max_size=6))
def test_bounds(points):
    length = mst_length(points)
    star = math.fsum(math.dist(points[0], p) for p in points[1:])
    assert length <= star + 1e-9
    nearest = max(min(math.dist(p, q) for k, q in enumerate(points) if k != i) for i, p in enumerate(points))
    assert length >= nearest - 1e-9
