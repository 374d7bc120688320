"""Taut paths: shortest paths in a fixed homotopy class.

Two tools:

* :func:`boundary_geodesic` pulls a boundary chain of a polygon taut
  inside the polygon minus some obstacle polygons.  The domain is
  triangulated (constrained Delaunay), the chain is pushed slightly into
  the domain and its sequence of crossed diagonals is reduced by
  cancelling immediate back-and-forth crossings.  The funnel algorithm on
  the resulting sleeve gives the shortest homotopic path.
* :func:`corner_chain` replaces a two-edge corner a-p-b by the shortest
  path homotopic to it when only points inside the triangle apb can
  obstruct it; that path is the convex chain of those points seen from p.
"""

from __future__ import annotations

from typing import Sequence

from .geometry import orient2d
from .triangulation import Triangulation, constrained_delaunay, ekey

Edge = tuple[int, int]


def _domain_triangles(t: Triangulation, outer: Sequence[int], constraints: set[Edge]) -> set[int]:
    """Triangles inside the ccw cycle `outer` but not separated from its
    inner side by constraint edges."""
    pts = t.vertices
    seeds = []
    for i in range(len(outer)):
        a, b = outer[i], outer[(i + 1) % len(outer)]
        for ti in t.edge_triangles[ekey(a, b)]:
            c = next(v for v in t.triangles[ti] if v not in (a, b))
            if orient2d(pts[a], pts[b], pts[c]) > 0:
                seeds.append(ti)
    inside = set(seeds)
    stack = list(seeds)
    while stack:
        ti = stack.pop()
        a, b, c = t.triangles[ti]
        for e in (ekey(a, b), ekey(b, c), ekey(c, a)):
            if e in constraints:
                continue
            for tj in t.edge_triangles[e]:
                if tj not in inside:
                    inside.add(tj)
                    stack.append(tj)
    return inside


def _third(t: Triangulation, ti: int, e: Edge) -> int:
    return next(v for v in t.triangles[ti] if v not in e)


def _across(t: Triangulation, ti: int, e: Edge) -> int:
    ts = t.edge_triangles[e]
    return ts[1] if ts[0] == ti else ts[0]


def funnel(points: Sequence, portals: Sequence[tuple[int, int]], start: int, goal: int) -> list[int]:
    """Shortest path through a sequence of portals (left, right), given as
    vertex ids, from `start` to `goal`.  Left is the counterclockwise side
    when facing the direction of travel."""
    pts = points
    seq = [(start, start)] + list(portals) + [(goal, goal)]
    path = [start]
    apex = left = right = start
    apex_i = left_i = right_i = 0
    i = 1
    while i < len(seq):
        l, r = seq[i]
        if orient2d(pts[apex], pts[right], pts[r]) >= 0:
            if apex == right or orient2d(pts[apex], pts[left], pts[r]) < 0:
                right, right_i = r, i
            else:
                if left != path[-1]:
                    path.append(left)
                apex, apex_i = left, left_i
                left = right = apex
                left_i = right_i = apex_i
                i = apex_i + 1
                continue
        if orient2d(pts[apex], pts[left], pts[l]) <= 0:
            if apex == left or orient2d(pts[apex], pts[right], pts[l]) > 0:
                left, left_i = l, i
            else:
                if right != path[-1]:
                    path.append(right)
                apex, apex_i = right, right_i
                left = right = apex
                left_i = right_i = apex_i
                i = apex_i + 1
                continue
        i += 1
    if path[-1] != goal:
        path.append(goal)
    return path


def boundary_geodesic(points: Sequence, outer: Sequence[int], p: int, q: int,
                      obstacles: Sequence[Sequence[int]]) -> list[int]:
    """Shortest path from p to q inside the simple ccw polygon `outer`,
    avoiding the interiors of the `obstacles` (closed walks), homotopic to
    the long way around the boundary from p to q.

    (p, q) must be a ccw edge of `outer`.  The result lists vertex ids
    from p to q.
    """
    k = len(outer)
    i = outer.index(p)
    if outer[(i + 1) % k] != q:
        raise ValueError("p, q must be consecutive counterclockwise")
    constraints = {ekey(outer[j], outer[(j + 1) % k]) for j in range(k)}
    for walk in obstacles:
        for j in range(len(walk)):
            a, b = walk[j], walk[(j + 1) % len(walk)]
            if a != b:
                constraints.add(ekey(a, b))
    used = sorted({*outer, *(v for w in obstacles for v in w)})
    local = {v: j for j, v in enumerate(used)}
    sub = [points[v] for v in used]
    t = constrained_delaunay(sub, [(local[a], local[b]) for a, b in constraints])
    lcons = {ekey(local[a], local[b]) for a, b in constraints}
    louter = [local[v] for v in outer]
    inside = _domain_triangles(t, louter, lcons)

    # clockwise boundary from p to q: p, pred(p), ..., q
    chain = [louter[(i - j) % k] for j in range(k)]
    assert chain[-1] == local[q]
    first = ekey(chain[0], chain[1])
    start_t = next(ti for ti in t.edge_triangles[first] if ti in inside)
    crossed: list[Edge] = []
    cur = start_t
    for j in range(1, len(chain) - 1):
        w, nxt = chain[j], chain[j + 1]
        entry = ekey(chain[j - 1], w)
        target = ekey(w, nxt)
        while True:
            c = _third(t, cur, entry)
            e = ekey(w, c)
            if e == target:
                break
            if crossed and crossed[-1] == e:
                crossed.pop()
            else:
                crossed.append(e)
            cur = _across(t, cur, e)
            entry = e
    # walk the reduced sequence to build oriented portals
    portals = []
    cur = start_t
    tp = t.vertices
    for e in crossed:
        c = _third(t, cur, e)
        a, b = e
        if orient2d(tp[a], tp[b], tp[c]) > 0:
            portals.append((used[b], used[a]))
        else:
            portals.append((used[a], used[b]))
        cur = _across(t, cur, e)
    return funnel(points, portals, p, q)


def corner_chain(points: Sequence, a: int, p: int, b: int, candidates: Sequence[int]) -> list[int]:
    """Vertices strictly between a and b on the shortest path homotopic to
    a-p-b, where the obstacles are the `candidates` lying in the closed
    triangle apb minus its two sides at p."""
    pa, pp, pb = points[a], points[p], points[b]
    side = orient2d(pa, pb, pp)
    if a == b:
        return []
    inside = []
    for v in candidates:
        if v in (a, b, p):
            continue
        x = points[v]
        if side == 0:
            # degenerate corner: a and b on one ray from p
            if orient2d(pa, pb, x) == 0 and _between(pa, pb, x):
                inside.append(v)
            continue
        o1 = orient2d(pp, pa, x)
        o2 = orient2d(pa, pb, x)
        o3 = orient2d(pb, pp, x)
        s = side
        # inside or on the base ab, strictly off the sides at p
        if o1 * s > 0 and o3 * s > 0 and o2 * s >= 0:
            inside.append(v)
    if side == 0:
        inside.sort(key=lambda v: (points[v][0] - pa[0]) ** 2 + (points[v][1] - pa[1]) ** 2)
        return inside
    chain = []
    cur = a
    remaining = set(inside)
    while True:
        best = b
        for v in sorted(remaining):
            o = orient2d(points[cur], points[best], points[v])
            if o * side > 0:
                best = v
            elif o == 0 and _between(points[cur], points[best], points[v]):
                best = v
        if best == b:
            return chain
        chain.append(best)
        remaining.discard(best)
        cur = best
        # points behind the new chain vertex can no longer be hull vertices
        remaining = {v for v in remaining if orient2d(points[cur], points[b], points[v]) * side >= 0}


def _between(a, b, x) -> bool:
    return (min(a[0], b[0]) <= x[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= x[1] <= max(a[1], b[1])
            and (x[0], x[1]) != (a[0], a[1]) and (x[0], x[1]) != (b[0], b[1]))
