import numpy as np
import pytest

import oracles
from hybrid_stereo.delaunay import DegenerateInputError, incircle, orient, triangulate


def check_triangulation(pts, tris, eps=1e-9):
    pts = np.asarray(pts, dtype=float)
    total = 0.0
    for a, b, c in tris:
        area = oracles.triangle_area(pts[a], pts[b], pts[c])
        assert area > 0, "triangles must be counter-clockwise and non-degenerate"
        total += area
        centre, r2 = oracles.circumcircle(pts[a], pts[b], pts[c])
        d2 = ((pts - centre) ** 2).sum(axis=1)
        others = np.ones(len(pts), dtype=bool)
        others[[a, b, c]] = False
        assert np.all(d2[others] >= r2 - eps * max(1.0, r2))
    hull = oracles.hull_area(pts)
    assert abs(total - hull) <= 1e-6 * hull
    assert oracles.overlapping_pairs(pts, tris) == 0


def test_overlap_oracle_agrees_with_pairwise_test(rng):
    pts = rng.random((25, 2)) * 50
    tris = np.vstack([triangulate(pts), [[0, 1, 2], [3, 4, 5]]])
    corners = [pts[list(t)] for t in tris]
    slow = sum(oracles.interiors_overlap(corners[i], corners[j])
               for i in range(len(corners)) for j in range(i + 1, len(corners)))
    assert slow == oracles.overlapping_pairs(pts, tris) > 0


def test_predicates_sign():
    assert orient(0, 0, 1, 0, 0, 1) > 0
    assert orient(0, 0, 0, 1, 1, 0) < 0
    assert incircle(0, 0, 1, 0, 0, 1, 0.2, 0.2) > 0
    assert incircle(0, 0, 1, 0, 0, 1, 5, 5) < 0


def test_single_triangle():
    tris = triangulate([(0, 0), (4, 1), (1, 3)])
    assert len(tris) == 1
    check_triangulation([(0, 0), (4, 1), (1, 3)], tris)


def test_unit_square():
    pts = [(0, 0), (1, 0), (1, 1), (0, 1)]
    tris = triangulate(pts)
    assert len(tris) == 2
    check_triangulation(pts, tris)
    # co-circular: the chosen diagonal is a property of insertion order and stable
    assert np.array_equal(tris, triangulate(pts))


def test_fifty_random_points(rng):
    pts = rng.random((50, 2)) * 100
    check_triangulation(pts, triangulate(pts))


def test_integer_grid_points():
    # pixel anchors are lattice points, full of co-circular quadruples
    pts = [(x, y) for y in range(0, 30, 5) for x in range(0, 40, 5)]
    tris = triangulate(pts)
    assert len(tris) == 2 * 7 * 5
    check_triangulation(pts, tris)


@pytest.mark.parametrize("pts", [
    [(0, 0), (1, 1)],
    [(0, 0), (1, 1), (2, 2), (5, 5)],
    [(3, 0), (3, 4), (3, 9)],
])
def test_degenerate_inputs(pts):
    with pytest.raises(DegenerateInputError):
        triangulate(pts)


def test_duplicates_rejected():
    with pytest.raises(ValueError):
        triangulate([(0, 0), (1, 0), (0, 1), (1, 0)])


def test_collinear_prefix_then_offline_point():
    pts = [(0, 0), (1, 0), (2, 0), (3, 0), (1, 2)]
    tris = triangulate(pts)
    assert len(tris) == 3
    check_triangulation(pts, tris)


def test_order_independent_in_general_position(rng):
    pts = rng.random((40, 2)) * 100

    def as_set(p, tris):
        return {tuple(sorted(map(tuple, p[list(t)].tolist()))) for t in tris}

    perm = rng.permutation(40)
    assert as_set(pts, triangulate(pts)) == as_set(pts[perm], triangulate(pts[perm]))
