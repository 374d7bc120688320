"""Planar predicates, convex hull, point location and edge metrics.

Predicates are exact: a floating-point evaluation is accepted only when its
magnitude exceeds a forward error bound (Shewchuk's stage-A filter), and
otherwise the determinant is recomputed with :class:`fractions.Fraction`,
which represents every finite double exactly.  Lengths are plain doubles;
compare them with :data:`LENGTH_TOL`.
"""

from __future__ import annotations

import enum
import math
import sys
from fractions import Fraction
from typing import NamedTuple, Sequence

from .errors import DegenerateError, SelfCrossingError

LENGTH_TOL = 1e-9

_EPS = sys.float_info.epsilon / 2
_CCW_ERRBOUND = (3.0 + 16.0 * _EPS) * _EPS
_ICC_ERRBOUND = (10.0 + 96.0 * _EPS) * _EPS


class Point(NamedTuple):
    x: float
    y: float
    id: int = -1


class Orientation(enum.IntEnum):
    CW = -1
    COLLINEAR = 0
    CCW = 1


class Location(enum.Enum):
    INSIDE = "inside"
    ON_BOUNDARY = "on_boundary"
    OUTSIDE = "outside"


class Metric(enum.Enum):
    EUCLID = "euclid"
    TSPLIB_EUC2D = "tsplib_euc2d"
    TSPLIB_GEO = "tsplib_geo"
    TSPLIB_ATT = "tsplib_att"


# ---------------------------------------------------------------------------
# exact predicates


def orient2d(a, b, c) -> int:
    """Sign of twice the signed area of triangle abc (+1 ccw, -1 cw, 0)."""
    detleft = (a[0] - c[0]) * (b[1] - c[1])
    detright = (a[1] - c[1]) * (b[0] - c[0])
    det = detleft - detright
    errbound = _CCW_ERRBOUND * (abs(detleft) + abs(detright))
    if det > errbound:
        return 1
    if -det > errbound:
        return -1
    if detleft == 0.0 and detright == 0.0:
        return 0
    ax, ay, bx, by, cx, cy = (Fraction(v) for v in (a[0], a[1], b[0], b[1], c[0], c[1]))
    exact = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx)
    return (exact > 0) - (exact < 0)


def orientation(p, q, r) -> Orientation:
    return Orientation(orient2d(p, q, r))


def incircle(a, b, c, d) -> int:
    """+1 if d lies strictly inside the circle through a, b, c (given ccw),
    -1 if strictly outside, 0 if cocircular."""
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    bdxcdy, cdxbdy = bdx * cdy, cdx * bdy
    cdxady, adxcdy = cdx * ady, adx * cdy
    adxbdy, bdxady = adx * bdy, bdx * ady
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady)
    permanent = ((abs(bdxcdy) + abs(cdxbdy)) * alift
                 + (abs(cdxady) + abs(adxcdy)) * blift
                 + (abs(adxbdy) + abs(bdxady)) * clift)
    errbound = _ICC_ERRBOUND * permanent
    if det > errbound:
        return 1
    if -det > errbound:
        return -1
    A = [Fraction(v) for v in (a[0], a[1])]
    B = [Fraction(v) for v in (b[0], b[1])]
    C = [Fraction(v) for v in (c[0], c[1])]
    D = [Fraction(v) for v in (d[0], d[1])]
    adx, ady = A[0] - D[0], A[1] - D[1]
    bdx, bdy = B[0] - D[0], B[1] - D[1]
    cdx, cdy = C[0] - D[0], C[1] - D[1]
    exact = ((adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
             + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
             + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady))
    return (exact > 0) - (exact < 0)


def on_segment(p, a, b) -> bool:
    """True iff p lies on the closed segment ab (exact)."""
    if orient2d(a, b, p) != 0:
        return False
    return (min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]))


def strictly_inside_segment(p, a, b) -> bool:
    return on_segment(p, a, b) and not _same(p, a) and not _same(p, b)


def _same(p, q) -> bool:
    return p[0] == q[0] and p[1] == q[1]


def segments_properly_cross(s, t) -> bool:
    """True iff the two segments cross at a single interior point or overlap
    along a segment of positive length.  Touching at an endpoint is not a
    crossing."""
    (a, b), (c, d) = s, t
    o1, o2 = orient2d(a, b, c), orient2d(a, b, d)
    o3, o4 = orient2d(c, d, a), orient2d(c, d, b)
    if o1 == 0 and o2 == 0:
        return _collinear_overlap(a, b, c, d)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    return False


def _collinear_overlap(a, b, c, d) -> bool:
    # project onto the dominant axis; all four points are collinear
    k = 0 if abs(b[0] - a[0]) + abs(d[0] - c[0]) >= abs(b[1] - a[1]) + abs(d[1] - c[1]) else 1
    lo1, hi1 = sorted((a[k], b[k]))
    lo2, hi2 = sorted((c[k], d[k]))
    return min(hi1, hi2) > max(lo1, lo2)


def segments_intersect(s, t) -> bool:
    """Closed-segment intersection test (touching counts)."""
    (a, b), (c, d) = s, t
    o1, o2 = orient2d(a, b, c), orient2d(a, b, d)
    o3, o4 = orient2d(c, d, a), orient2d(c, d, b)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    return (o1 == 0 and on_segment(c, a, b)) or (o2 == 0 and on_segment(d, a, b)) \
        or (o3 == 0 and on_segment(a, c, d)) or (o4 == 0 and on_segment(b, c, d))


# ---------------------------------------------------------------------------
# hull


def convex_hull(points: Sequence[Point]) -> list[Point]:
    """Counterclockwise hull vertices without collinear boundary points.

    Raises DegenerateError for fewer than three points or collinear input.
    """
    pts = sorted(set(points), key=lambda p: (p[0], p[1], p[2] if len(p) > 2 else 0))
    if len(pts) < 3:
        raise DegenerateError("convex hull needs at least 3 points")
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and orient2d(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and orient2d(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise DegenerateError("all points are collinear")
    return hull


def hull_boundary(points: Sequence[Point]) -> list[Point]:
    """All points on the hull boundary in ccw order, including points lying
    in the relative interior of a hull edge."""
    hull = convex_hull(points)
    result: list = []
    for i, a in enumerate(hull):
        b = hull[(i + 1) % len(hull)]
        between = [p for p in points
                   if not _same(p, a) and not _same(p, b) and strictly_inside_segment(p, a, b)]
        between.sort(key=lambda p: (p[0] - a[0]) ** 2 + (p[1] - a[1]) ** 2)
        result.append(a)
        result.extend(between)
    return result


# ---------------------------------------------------------------------------
# cycles


def signed_area2(cycle: Sequence) -> float:
    s = 0.0
    n = len(cycle)
    for i in range(n):
        x1, y1 = cycle[i][0], cycle[i][1]
        x2, y2 = cycle[(i + 1) % n][0], cycle[(i + 1) % n][1]
        s += x1 * y2 - x2 * y1
    return s


def exact_signed_area2(cycle: Sequence) -> Fraction:
    s = Fraction(0)
    n = len(cycle)
    for i in range(n):
        x1, y1 = Fraction(cycle[i][0]), Fraction(cycle[i][1])
        x2, y2 = Fraction(cycle[(i + 1) % n][0]), Fraction(cycle[(i + 1) % n][1])
        s += x1 * y2 - x2 * y1
    return s


def is_simple_cycle(cycle: Sequence) -> bool:
    """Closed polygonal chain without self-intersection (distinct vertices,
    non-adjacent edges disjoint, adjacent edges meeting only at their shared
    vertex)."""
    n = len(cycle)
    if n < 3:
        return False
    if len({(p[0], p[1]) for p in cycle}) != n:
        return False
    edges = [(cycle[i], cycle[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        # consecutive edges (i-1, i) share cycle[i] only
        prev, here, nxt = cycle[i - 1], cycle[i], cycle[(i + 1) % n]
        if on_segment(prev, here, nxt) or on_segment(nxt, prev, here):
            return False
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if segments_intersect(edges[i], edges[j]):
                return False
    return True


def point_in_cycle(p, cycle: Sequence, check_simple: bool = True) -> Location:
    """Exact location of p relative to a simple closed polygon."""
    if check_simple and not is_simple_cycle(cycle):
        raise SelfCrossingError("cycle is not simple")
    n = len(cycle)
    winding = 0
    py = p[1]
    for i in range(n):
        a = cycle[i]
        b = cycle[(i + 1) % n]
        if on_segment(p, a, b):
            return Location.ON_BOUNDARY
        if a[1] <= py:
            if b[1] > py and orient2d(a, b, p) > 0:
                winding += 1
        elif b[1] <= py and orient2d(a, b, p) < 0:
            winding -= 1
    return Location.INSIDE if winding != 0 else Location.OUTSIDE


def cycle_length(cycle: Sequence, metric: Metric = Metric.EUCLID) -> float:
    n = len(cycle)
    return sum(edge_length(metric, cycle[i], cycle[(i + 1) % n]) for i in range(n))


# ---------------------------------------------------------------------------
# metrics

_GEO_PI = 3.141592
_GEO_RADIUS = 6378.388


def _nint(x: float) -> int:
    return int(x + 0.5)


def _geo_radians(coord: float) -> float:
    deg = int(coord)
    minutes = coord - deg
    return _GEO_PI * (deg + 5.0 * minutes / 3.0) / 180.0


def edge_length(metric: Metric, p, q) -> float:
    dx = p[0] - q[0]
    dy = p[1] - q[1]
    if metric is Metric.EUCLID:
        return math.sqrt(dx * dx + dy * dy)
    if metric is Metric.TSPLIB_EUC2D:
        return float(_nint(math.sqrt(dx * dx + dy * dy)))
    if metric is Metric.TSPLIB_ATT:
        r = math.sqrt((dx * dx + dy * dy) / 10.0)
        t = _nint(r)
        return float(t + 1 if t < r else t)
    if metric is Metric.TSPLIB_GEO:
        if dx == 0 and dy == 0:
            return 0.0
        lat_p, lon_p = _geo_radians(p[0]), _geo_radians(p[1])
        lat_q, lon_q = _geo_radians(q[0]), _geo_radians(q[1])
        q1 = math.cos(lon_p - lon_q)
        q2 = math.cos(lat_p - lat_q)
        q3 = math.cos(lat_p + lat_q)
        return float(int(_GEO_RADIUS * math.acos(max(-1.0, min(1.0, 0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3)))) + 1.0))
    raise ValueError(f"unknown metric {metric!r}")
