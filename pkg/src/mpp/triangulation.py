"""Delaunay and constrained Delaunay triangulation, plus the edge-adjacency
walk over triangles used to trace separation curves.

Construction: a sweep over lexicographically sorted points builds an initial
triangulation, then Lawson flips make it (constrained) Delaunay using the
exact incircle predicate.  Cocircular quadruples resolve towards the diagonal
incident to the lowest vertex id, which is a consistent symbolic perturbation
of the lifting map, so the result is unique and reproducible.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import CrossingConstraintsError, DegenerateError
from .geometry import Point, exact_signed_area2, incircle, orient2d, segments_properly_cross, strictly_inside_segment

Edge = tuple[int, int]


def ekey(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Triangulation:
    vertices: tuple[Point, ...]
    triangles: tuple[tuple[int, int, int], ...]
    constrained_edges: frozenset[Edge]
    edge_triangles: dict[Edge, tuple[int, ...]] = field(compare=False, repr=False)

    @property
    def edges(self) -> list[Edge]:
        """All edges, sorted; the position in this list is the edge index."""
        return sorted(self.edge_triangles)

    @property
    def hull_edges(self) -> list[Edge]:
        return sorted(e for e, ts in self.edge_triangles.items() if len(ts) == 1)

    def edge_set(self) -> set[Edge]:
        return set(self.edge_triangles)

    def opposite(self, e: Edge) -> list[int]:
        """Vertices opposite to edge e in its incident triangles."""
        out = []
        for t in self.edge_triangles[e]:
            out.extend(v for v in self.triangles[t] if v not in e)
        return out


# ---------------------------------------------------------------------------
# mutable mesh used during construction


class _Mesh:
    def __init__(self, pts: Sequence[Point]):
        self.pts = pts
        self.tris: list[list[int] | None] = []
        self.edge_tris: dict[Edge, list[int]] = defaultdict(list)
        self.constrained: set[Edge] = set()

    def add(self, a: int, b: int, c: int) -> int:
        if orient2d(self.pts[a], self.pts[b], self.pts[c]) < 0:
            b, c = c, b
        t = len(self.tris)
        self.tris.append([a, b, c])
        for u, v in ((a, b), (b, c), (c, a)):
            self.edge_tris[ekey(u, v)].append(t)
        return t

    def remove(self, t: int) -> None:
        tri = self.tris[t]
        assert tri is not None
        for u, v in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            lst = self.edge_tris[ekey(u, v)]
            lst.remove(t)
            if not lst:
                del self.edge_tris[ekey(u, v)]
        self.tris[t] = None

    def third(self, t: int, e: Edge) -> int:
        tri = self.tris[t]
        assert tri is not None
        for v in tri:
            if v != e[0] and v != e[1]:
                return v
        raise AssertionError("degenerate triangle")

    def id_of(self, v: int) -> int:
        p = self.pts[v]
        return p[2] if len(p) > 2 and p[2] >= 0 else v

    def is_illegal(self, e: Edge) -> bool:
        if e in self.constrained:
            return False
        ts = self.edge_tris.get(e)
        if ts is None or len(ts) != 2:
            return False
        a, b = e
        c = self.third(ts[0], e)
        d = self.third(ts[1], e)
        pa, pb, pc, pd = self.pts[a], self.pts[b], self.pts[c], self.pts[d]
        if orient2d(pa, pb, pc) < 0:
            pa, pb = pb, pa
        s = incircle(pa, pb, pc, pd)
        if s > 0:
            return True
        if s < 0:
            return False
        # cocircular: keep the diagonal touching the lowest id
        if orient2d(pc, pd, pa) * orient2d(pc, pd, pb) >= 0:
            return False
        return min(self.id_of(c), self.id_of(d)) < min(self.id_of(a), self.id_of(b))

    def flip(self, e: Edge) -> tuple[int, int]:
        t1, t2 = self.edge_tris[e]
        a, b = e
        c = self.third(t1, e)
        d = self.third(t2, e)
        self.remove(t1)
        self.remove(t2)
        self.add(c, d, a)
        self.add(d, c, b)
        return c, d

    def legalize(self, stack: list[Edge]) -> None:
        while stack:
            e = stack.pop()
            if e not in self.edge_tris or not self.is_illegal(e):
                continue
            a, b = e
            c, d = self.flip(e)
            stack.extend((ekey(a, c), ekey(c, b), ekey(b, d), ekey(d, a)))

    def freeze(self) -> Triangulation:
        tris = []
        for tri in self.tris:
            if tri is not None:
                tris.append(tuple(tri))
        tris.sort(key=lambda t: tuple(sorted(t)))
        edge_tris: dict[Edge, list[int]] = defaultdict(list)
        for i, (a, b, c) in enumerate(tris):
            for u, v in ((a, b), (b, c), (c, a)):
                edge_tris[ekey(u, v)].append(i)
        return Triangulation(
            vertices=tuple(self.pts),
            triangles=tuple(tris),
            constrained_edges=frozenset(self.constrained),
            edge_triangles={e: tuple(ts) for e, ts in edge_tris.items()},
        )


def _sweep(mesh: _Mesh) -> None:
    pts = mesh.pts
    order = sorted(range(len(pts)), key=lambda i: (pts[i][0], pts[i][1]))
    for i in range(1, len(order)):
        p, q = pts[order[i - 1]], pts[order[i]]
        if p[0] == q[0] and p[1] == q[1]:
            raise DegenerateError(f"duplicate points {order[i - 1]} and {order[i]}")
    j = 2
    while j < len(order) and orient2d(pts[order[0]], pts[order[1]], pts[order[j]]) == 0:
        j += 1
    if j == len(order):
        raise DegenerateError("all points are collinear")
    apex = order[j]
    line = order[:j]
    for u, v in zip(line, line[1:]):
        mesh.add(u, v, apex)
    # ccw hull as a vertex list
    if orient2d(pts[line[0]], pts[line[-1]], pts[apex]) > 0:
        hull = list(line) + [apex]
    else:
        hull = [line[0], apex] + list(reversed(line[1:]))
    for k in order[j + 1:]:
        p = pts[k]
        h = len(hull)
        visible = [orient2d(pts[hull[i]], pts[hull[(i + 1) % h]], p) < 0 for i in range(h)]
        if not any(visible):
            raise AssertionError("sweep point not outside hull")
        # rotate so the visible run is contiguous and starts at index 0
        start = next(i for i in range(h) if visible[i] and not visible[i - 1])
        hull = hull[start:] + hull[:start]
        visible = visible[start:] + visible[:start]
        run = 0
        while run < h and visible[run]:
            mesh.add(hull[run + 1 if run + 1 < h else 0], hull[run], k)
            run += 1
        hull = [hull[0], k] + hull[run:]


def _build(points: Sequence[Point]) -> _Mesh:
    if len(points) < 3:
        raise DegenerateError("triangulation needs at least 3 points")
    mesh = _Mesh(points)
    _sweep(mesh)
    mesh.legalize(sorted(mesh.edge_tris))
    return mesh


def delaunay(points: Sequence[Point]) -> Triangulation:
    """Delaunay triangulation; vertex i of the result is points[i]."""
    return _build(points).freeze()


# ---------------------------------------------------------------------------
# constraints


def _split_at_points(points: Sequence[Point], u: int, v: int) -> list[Edge]:
    inner = [w for w in range(len(points))
             if w != u and w != v and strictly_inside_segment(points[w], points[u], points[v])]
    if not inner:
        return [ekey(u, v)]
    pu = points[u]
    inner.sort(key=lambda w: (points[w][0] - pu[0]) ** 2 + (points[w][1] - pu[1]) ** 2)
    chain = [u] + inner + [v]
    return [ekey(a, b) for a, b in zip(chain, chain[1:])]


def _crossed_edges(mesh: _Mesh, u: int, v: int) -> list[Edge]:
    """Mesh edges properly crossed by segment uv, in order from u to v."""
    pts = mesh.pts
    pu, pv = pts[u], pts[v]
    # find the triangle at u whose opposite edge is crossed
    start = None
    for e, ts in mesh.edge_tris.items():
        if u in e:
            continue
        for t in ts:
            tri = mesh.tris[t]
            if tri is not None and u in tri and segments_properly_cross((pu, pv), (pts[e[0]], pts[e[1]])):
                start = (t, e)
                break
        if start:
            break
    if start is None:
        return []
    crossed = []
    t, e = start
    while True:
        crossed.append(e)
        others = [x for x in mesh.edge_tris[e] if x != t]
        if not others:
            raise AssertionError("constraint walk left the triangulation")
        t = others[0]
        w = mesh.third(t, e)
        if w == v:
            return crossed
        a, b = e
        nxt = None
        for cand in (ekey(a, w), ekey(b, w)):
            if segments_properly_cross((pu, pv), (pts[cand[0]], pts[cand[1]])):
                nxt = cand
                break
        if nxt is None:
            raise AssertionError("constraint passes through a vertex")
        e = nxt


def _ear_clip(mesh: _Mesh, poly: list[int]) -> None:
    pts = mesh.pts
    poly = list(poly)
    if exact_signed_area2([pts[v] for v in poly]) < 0:
        poly.reverse()
    while len(poly) > 3:
        n = len(poly)
        for i in range(n):
            a, b, c = poly[i - 1], poly[i], poly[(i + 1) % n]
            if orient2d(pts[a], pts[b], pts[c]) <= 0:
                continue
            blocked = False
            for w in poly:
                if w in (a, b, c):
                    continue
                if (orient2d(pts[a], pts[b], pts[w]) >= 0 and orient2d(pts[b], pts[c], pts[w]) >= 0
                        and orient2d(pts[c], pts[a], pts[w]) >= 0):
                    blocked = True
                    break
            if not blocked:
                mesh.add(a, b, c)
                del poly[i]
                break
        else:
            raise AssertionError("ear clipping failed")
    mesh.add(*poly)


def _insert_constraint(mesh: _Mesh, u: int, v: int) -> None:
    e = ekey(u, v)
    if e in mesh.edge_tris:
        mesh.constrained.add(e)
        return
    crossed = _crossed_edges(mesh, u, v)
    for c in crossed:
        if c in mesh.constrained:
            raise CrossingConstraintsError(f"constraint {e} crosses constraint {c}")
    pts = mesh.pts
    pu, pv = pts[u], pts[v]
    left, right = [u], [u]
    dead: set[int] = set()
    for a, b in crossed:
        for t in mesh.edge_tris[(a, b)]:
            dead.add(t)
        for w in (a, b):
            side = left if orient2d(pu, pv, pts[w]) > 0 else right
            if side[-1] != w:
                side.append(w)
    for t in sorted(dead):
        mesh.remove(t)
    left.append(v)
    right.append(v)
    _ear_clip(mesh, left)
    _ear_clip(mesh, right)
    mesh.constrained.add(e)


def constrained_delaunay(points: Sequence[Point], constraint_edges: Iterable[Edge]) -> Triangulation:
    """Constrained Delaunay triangulation containing every constraint edge.

    Constraints passing through input points are split there.  Raises
    CrossingConstraintsError if two constraints cross.
    """
    cons = sorted({ekey(*e) for e in constraint_edges})
    for i in range(len(cons)):
        a = (points[cons[i][0]], points[cons[i][1]])
        for j in range(i + 1, len(cons)):
            if segments_properly_cross(a, (points[cons[j][0]], points[cons[j][1]])):
                raise CrossingConstraintsError(f"constraints {cons[i]} and {cons[j]} cross")
    mesh = _build(points)
    pieces: list[Edge] = []
    for u, v in cons:
        pieces.extend(_split_at_points(points, u, v))
    for u, v in pieces:
        _insert_constraint(mesh, u, v)
    mesh.legalize(sorted(mesh.edge_tris))
    return mesh.freeze()


# ---------------------------------------------------------------------------
# adjacency walk


class DualWalk:
    """Edge adjacency through shared triangles, skipping blocked edges."""

    def __init__(self, t: Triangulation, blocked: Iterable[Edge] = ()):
        self.t = t
        self.blocked = {ekey(*e) for e in blocked}
        self.index = {e: i for i, e in enumerate(t.edges)}

    def neighbors(self, e: Edge) -> list[Edge]:
        e = ekey(*e)
        out = set()
        for ti in self.t.edge_triangles[e]:
            a, b, c = self.t.triangles[ti]
            for f in (ekey(a, b), ekey(b, c), ekey(c, a)):
                if f != e and f not in self.blocked:
                    out.add(f)
        return sorted(out, key=self.index.__getitem__)

    def triangle_neighbors(self, e: Edge) -> list[tuple[int, Edge]]:
        """(shared triangle, adjacent edge) pairs, unblocked, index order."""
        e = ekey(*e)
        out = []
        for ti in self.t.edge_triangles[e]:
            a, b, c = self.t.triangles[ti]
            for f in (ekey(a, b), ekey(b, c), ekey(c, a)):
                if f != e and f not in self.blocked:
                    out.append((ti, f))
        out.sort(key=lambda x: self.index[x[1]])
        return out


def dual_walk(t: Triangulation, blocked: Iterable[Edge] = ()) -> DualWalk:
    return DualWalk(t, blocked)
