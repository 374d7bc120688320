import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mpp.errors import SelfCrossingError
from mpp.geometry import (Location, Metric, Orientation, Point, convex_hull, edge_length, hull_boundary,
                          incircle, is_simple_cycle, orient2d, orientation, point_in_cycle,
                          segments_intersect, segments_properly_cross)

coord = st.fractions(min_value=-50, max_value=50, max_denominator=16).map(float)
pt = st.tuples(coord, coord)


def exact_orient(a, b, c):
    a, b, c = ([Fraction(v) for v in p] for p in (a, b, c))
    d = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    return (d > 0) - (d < 0)


@pytest.mark.parametrize("pts, expected", [
    (((0, 0), (1, 0), (0, 1)), Orientation.CCW),
    (((0, 0), (1, 1), (2, 2)), Orientation.COLLINEAR),
    (((0, 0), (0, 1), (1, 0)), Orientation.CW),
])
def test_orientation_examples(pts, expected):
    assert orientation(*pts) == expected


def test_orient2d_survives_cancellation():
    # nearly collinear points that fool naive double arithmetic
    a = (0.5, 0.5)
    b = (12.0, 12.0)
    c = (24.0, 24.0 + 2.0 ** -40)
    assert orient2d(a, b, c) == exact_orient(a, b, c) == 1
    assert orient2d(a, b, (24.0, 24.0)) == 0


@given(pt, pt, pt)
def test_orient2d_matches_rational_and_is_antisymmetric(a, b, c):
    o = orient2d(a, b, c)
    assert o == exact_orient(a, b, c)
    assert orient2d(b, a, c) == -o
    assert orient2d(a, c, b) == -o
    assert orient2d(b, c, a) == o


@given(pt, pt, pt, pt)
def test_incircle_symmetric_under_even_permutation(a, b, c, d):
    assert incircle(a, b, c, d) == incircle(b, c, a, d)


@pytest.mark.parametrize("s, t, expected", [
    (((0, 0), (2, 2)), ((2, 0), (0, 2)), True),
    (((0, 0), (1, 0)), ((1, 0), (2, 0)), False),
    (((0, 0), (3, 0)), ((1, 0), (2, 0)), True),
    (((0, 0), (1, 0)), ((2, 1), (3, 1)), False),
    (((0, 0), (2, 0)), ((1, 0), (1, 5)), False),   # T-junction touches, does not cross
])
def test_segments_properly_cross_examples(s, t, expected):
    assert segments_properly_cross(s, t) is expected
    assert segments_properly_cross(t, s) is expected


def test_segments_intersect_counts_touching():
    assert segments_intersect(((0, 0), (2, 0)), ((1, 0), (1, 5)))
    assert segments_intersect(((0, 0), (1, 0)), ((1, 0), (2, 3)))
    assert not segments_intersect(((0, 0), (1, 0)), ((0, 1), (1, 1)))


@given(pt, pt, pt, pt)
def test_proper_crossing_implies_intersection(a, b, c, d):
    if segments_properly_cross((a, b), (c, d)):
        assert segments_intersect((a, b), (c, d))


def test_hull_excludes_interior_points():
    pts = [Point(*p, i) for i, p in enumerate([(0, 0), (10, 0), (10, 10), (0, 10), (4, 4), (6, 4), (5, 6)])]
    assert [(p.x, p.y) for p in convex_hull(pts)] == [(0, 0), (10, 0), (10, 10), (0, 10)]


def test_hull_of_triangle_is_ccw():
    pts = [Point(0, 0, 0), Point(0, 5, 1), Point(4, 1, 2)]
    hull = convex_hull(pts)
    assert len(hull) == 3
    assert orient2d(*hull) > 0


def test_hull_boundary_keeps_points_on_edges():
    pts = [Point(*p, i) for i, p in enumerate([(0, 0), (2, 0), (4, 0), (4, 4), (0, 4), (1, 1)])]
    assert {p.id for p in convex_hull(pts)} == {0, 2, 3, 4}
    assert {p.id for p in hull_boundary(pts)} == {0, 1, 2, 3, 4}


def test_hull_of_random_disk_passes_brute_force_check():
    rng = np.random.default_rng(7)
    r = np.sqrt(rng.uniform(0, 1, 30)) * 100
    a = rng.uniform(0, 2 * math.pi, 30)
    pts = [Point(float(x), float(y), i) for i, (x, y) in enumerate(zip(r * np.cos(a), r * np.sin(a)))]
    hull = convex_hull(pts)
    for i in range(len(hull)):
        p, q = hull[i], hull[(i + 1) % len(hull)]
        assert all(orient2d(p, q, s) >= 0 for s in pts)
    ids = {p.id for p in hull}
    # every non-hull point is strictly inside
    for s in pts:
        if s.id not in ids:
            assert point_in_cycle(s, hull) is Location.INSIDE


SQUARE = [(0, 0), (10, 0), (10, 10), (0, 10)]


@pytest.mark.parametrize("p, loc", [
    ((5, 5), Location.INSIDE),
    ((10, 5), Location.ON_BOUNDARY),
    ((11, 5), Location.OUTSIDE),
    ((0, 0), Location.ON_BOUNDARY),
    ((5, 10.000001), Location.OUTSIDE),
])
def test_point_in_cycle_examples(p, loc):
    assert point_in_cycle(p, SQUARE) is loc
    assert point_in_cycle(p, SQUARE[::-1]) is loc


def test_point_in_self_crossing_cycle_rejected():
    with pytest.raises(SelfCrossingError):
        point_in_cycle((1, 1), [(0, 0), (2, 2), (2, 0), (0, 2)])


def test_is_simple_cycle():
    assert is_simple_cycle(SQUARE)
    assert not is_simple_cycle([(0, 0), (2, 2), (2, 0), (0, 2)])


def test_edge_length_metrics():
    assert edge_length(Metric.EUCLID, (0, 0), (3, 4)) == 5.0
    assert edge_length(Metric.TSPLIB_EUC2D, (0, 0), (1, 1)) == 1.0
    assert edge_length(Metric.TSPLIB_EUC2D, (0, 0), (1, 2)) == 2.0


def _geo_reference(p, q):
    # published TSPLIB GEO formula, written out independently
    def rad(c):
        deg = int(c)
        return 3.141592 * (deg + 5.0 * (c - deg) / 3.0) / 180.0
    lat1, lon1 = rad(p[0]), rad(p[1])
    lat2, lon2 = rad(q[0]), rad(q[1])
    q1 = math.cos(lon1 - lon2)
    q2 = math.cos(lat1 - lat2)
    q3 = math.cos(lat1 + lat2)
    return int(6378.388 * math.acos(0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3)) + 1.0)


def test_geo_metric_matches_reference_on_burma14_nodes_1_2():
    p, q = (16.47, 96.10), (16.47, 94.44)
    assert edge_length(Metric.TSPLIB_GEO, p, q) == _geo_reference(p, q) == 153
    assert edge_length(Metric.TSPLIB_GEO, p, p) == 0


def test_att_metric():
    # pseudo-Euclidean: r = sqrt((dx^2 + dy^2) / 10), rounded up when nint(r) < r
    assert edge_length(Metric.TSPLIB_ATT, (0, 0), (10, 0)) == 4.0
    assert edge_length(Metric.TSPLIB_ATT, (0, 0), (0, 0)) == 0.0


@given(pt, pt)
def test_euclid_symmetric_nonnegative(p, q):
    d = edge_length(Metric.EUCLID, p, q)
    assert d >= 0
    assert d == edge_length(Metric.EUCLID, q, p)
