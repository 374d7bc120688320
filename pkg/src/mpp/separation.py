"""Cuts that remove an infeasible integral edge selection.

Curve-based cuts (glue, tail, hole-in-hole) trace a polyline through the
constrained Delaunay triangulation of the current selection: it starts at a
vertex or a hull edge, bends at the midpoints of triangulation edges and
ends on the convex hull.  Every candidate edge that meets the polyline is
counted as crossing it; counting a touching edge as a crossing only makes a
>= cut weaker, so validity is kept.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .arrangement import (CycleClass, EdgeSolution, build_nesting_forest, classify, crossing_pairs,
                          extract_cycles, is_feasible)
from .errors import NoCurveError, NotSeparableError, NoTwoCrossingPathError
from .geometry import segments_intersect, segments_properly_cross
from .instances import Instance
from .ip import Cut, CutKind, cycle_cut, ekey, subtour_cut_for
from .triangulation import DualWalk, Triangulation, constrained_delaunay

Edge = tuple[int, int]
XY = tuple[float, float]


@dataclass(frozen=True)
class CutConfig:
    dsc: bool = True
    glue: bool = True
    tail: bool = True
    hih: bool = True
    crossing: bool = True

    @classmethod
    def parse(cls, text: str) -> CutConfig:
        """Comma-separated family names; "all" and "none" are accepted."""
        names = {s.strip().lower() for s in text.split(",") if s.strip()}
        if names == {"all"}:
            return cls()
        if names in (set(), {"none"}):
            return cls(False, False, False, False, False)
        known = {"dsc", "glue", "tail", "hih", "crossing"}
        unknown = names - known
        if unknown:
            raise ValueError(f"unknown cut families: {', '.join(sorted(unknown))}")
        return cls(**{k: k in names for k in known})

    def families(self) -> list[str]:
        return [k for k in ("dsc", "glue", "tail", "hih", "crossing") if getattr(self, k)]


@dataclass(frozen=True)
class CurveTrace:
    polyline: tuple[XY, ...]
    tri_edges: tuple[Edge, ...]       # triangulation edges at the bends
    crossed_edges: frozenset[Edge]    # candidate edges meeting the polyline
    crossed_used: frozenset[Edge]


class _Context:
    """Per-selection data shared by the curve searches."""

    def __init__(self, inst: Instance, chosen: Iterable[Edge]):
        self.inst = inst
        self.chosen = frozenset(ekey(*e) for e in chosen)
        self._tri: Triangulation | None = None
        self._walk: DualWalk | None = None

    @property
    def tri(self) -> Triangulation:
        if self._tri is None:
            self._tri = constrained_delaunay(self.inst.points, self.chosen)
        return self._tri

    @cached_property
    def hull(self) -> frozenset[Edge]:
        return frozenset(self.tri.hull_edges)

    def walk(self) -> DualWalk:
        if self._walk is None:
            self._walk = DualWalk(self.tri, self.chosen)
        return self._walk

    def unused_hull_edges(self) -> list[Edge]:
        return [e for e in self.tri.hull_edges if e not in self.chosen]

    def midpoint(self, e: Edge) -> XY:
        a, b = self.inst.points[e[0]], self.inst.points[e[1]]
        return ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)

    def beyond(self, e: Edge) -> XY:
        """A point outside the hull, straight out from hull edge e."""
        (ti,) = self.tri.edge_triangles[e]
        c = next(v for v in self.tri.triangles[ti] if v not in e)
        a, b, q = self.inst.points[e[0]], self.inst.points[e[1]], self.inst.points[c]
        m = self.midpoint(e)
        nx, ny = b[1] - a[1], a[0] - b[0]
        if nx * (q[0] - m[0]) + ny * (q[1] - m[1]) > 0:
            nx, ny = -nx, -ny
        return (m[0] + nx, m[1] + ny)

    def trace(self, bends: Sequence[Edge], start_vertex: int | None = None) -> CurveTrace:
        # a float midpoint may sit a rounding step off its edge; ends on the
        # hull are pushed outside so the curve really leaves the hull there
        pts = [self.midpoint(e) for e in bends]
        if start_vertex is not None:
            p = self.inst.points[start_vertex]
            pts.insert(0, (p[0], p[1]))
        elif bends[0] in self.hull:
            pts.insert(0, self.beyond(bends[0]))
        if bends[-1] in self.hull:
            pts.append(self.beyond(bends[-1]))
        crossed = _edges_meeting(self.inst, pts)
        return CurveTrace(tuple(pts), tuple(bends), crossed, frozenset(crossed & self.chosen))


def _edges_meeting(inst: Instance, poly: Sequence[XY]) -> frozenset[Edge]:
    """Candidate edges meeting the closed polyline, exactly."""
    edges = inst.candidate_edges
    if len(poly) < 2:
        return frozenset()
    xy = np.array([(p[0], p[1]) for p in inst.points], dtype=float)
    e = np.array(edges, dtype=int)
    a, b = xy[e[:, 0]], xy[e[:, 1]]
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    out = set()
    for s in range(len(poly) - 1):
        p, q = poly[s], poly[s + 1]
        plo = (min(p[0], q[0]), min(p[1], q[1]))
        phi = (max(p[0], q[0]), max(p[1], q[1]))
        near = np.flatnonzero((lo[:, 0] <= phi[0]) & (hi[:, 0] >= plo[0]) & (lo[:, 1] <= phi[1]) & (hi[:, 1] >= plo[1]))
        for j in near:
            u, v = edges[j]
            if edges[j] in out:
                continue
            if segments_intersect((p, q), (inst.points[u], inst.points[v])):
                out.add(edges[j])
    return frozenset(out)


def _chain(parent: dict[Edge, Edge | None], e: Edge) -> list[Edge]:
    out = [e]
    while parent[out[-1]] is not None:
        out.append(parent[out[-1]])
    return out


# ---------------------------------------------------------------------------
# individual cut families


def crossing_pair_cut(inst: Instance, e: Edge, f: Edge) -> Cut:
    """x_e + x_f <= 1 for two properly crossing edges."""
    pts = inst.points
    if not segments_properly_cross((pts[e[0]], pts[e[1]]), (pts[f[0]], pts[f[1]])):
        raise ValueError(f"edges {e} and {f} do not cross")
    return Cut.of({ekey(*e): 1, ekey(*f): 1}, "<=", 1, CutKind.CROSSING)


def glue_curve(ctx: _Context) -> CurveTrace:
    """Curve between two distinct unused hull edges avoiding used edges:
    multi-source BFS over the triangulation from all unused hull edges."""
    sources = ctx.unused_hull_edges()
    if len(sources) < 2:
        raise NoCurveError("fewer than two unused hull edges")
    walk = ctx.walk()
    label: dict[Edge, int] = {}
    parent: dict[Edge, Edge | None] = {}
    queue: deque[Edge] = deque()
    for i, s in enumerate(sources):
        label[s] = i
        parent[s] = None
        queue.append(s)
    while queue:
        e = queue.popleft()
        for f in walk.neighbors(e):
            if f not in label:
                label[f] = label[e]
                parent[f] = e
                queue.append(f)
            elif label[f] != label[e]:
                bends = _chain(parent, e)[::-1] + _chain(parent, f)
                return ctx.trace(bends)
    raise NoCurveError("the unused hull edges are pairwise separated by used edges")


def glue_cut(solution: EdgeSolution, ctx: _Context | None = None) -> Cut:
    """sum over edges crossing a hull-to-hull curve >= 2.  Any polygon's
    outer boundary separates the pockets of two distinct unused hull edges,
    so such a curve is crossed at least twice."""
    ctx = ctx or _Context(solution.instance, solution.chosen)
    d = extract_cycles(solution)
    hull = set(solution.instance.hull)
    touching = [c for c in d.cycles if any(v in hull for v in c)]
    if len(touching) < 2:
        raise ValueError("glue cuts need two components containing hull points")
    curve = glue_curve(ctx)
    return Cut.of({e: 1 for e in curve.crossed_edges}, ">=", 2, CutKind.GLUE)


def _delta(inst: Instance, verts: set[int]) -> set[Edge]:
    return {e for e in inst.candidate_edges if (e[0] in verts) != (e[1] in verts)}


def tail_curve(ctx: _Context, cycle: Sequence[int]) -> CurveTrace:
    """BFS from the cycle's edges to the first unused hull edge."""
    k = len(cycle)
    own = sorted(ekey(cycle[i], cycle[(i + 1) % k]) for i in range(k))
    targets = set(ctx.unused_hull_edges())
    walk = ctx.walk()
    parent: dict[Edge, Edge | None] = {e: None for e in own}
    queue = deque(sorted(own, key=walk.index.__getitem__))
    while queue:
        e = queue.popleft()
        for f in walk.neighbors(e):
            if f in parent:
                continue
            parent[f] = e
            if f in targets:
                bends = _chain(parent, f)[::-1]
                return ctx.trace(bends, start_vertex=bends[0][0])
            queue.append(f)
    raise NoCurveError("cycle is enclosed; no tail to the hull")


def tail_cut(solution: EdgeSolution, cycle: Sequence[int], ctx: _Context | None = None) -> Cut:
    """sum_{X(R_T) minus edges at C} x_e + sum_{delta(C)} x_e >= 1.

    Either an edge leaves C, or C's points lie on holes, which are strictly
    inside the outer boundary; then the tail from a point of C to the hull
    meets the outer boundary.
    """
    inst = solution.instance
    ctx = ctx or _Context(inst, solution.chosen)
    verts = set(cycle)
    if verts & set(inst.hull):
        raise ValueError("tail cuts need a cycle without hull points")
    d = extract_cycles(solution)
    forest = build_nesting_forest(d)
    k = d.cycle_of[cycle[0]]
    if forest.parent[k] is not None:
        raise ValueError("cycle is enclosed by another cycle")
    curve = tail_curve(ctx, d.cycles[k])
    coeffs = {e: 1 for e in curve.crossed_edges if e[0] not in verts and e[1] not in verts}
    coeffs.update({e: 1 for e in _delta(inst, verts)})
    return Cut.of(coeffs, ">=", 1, CutKind.TAIL)


def hih_curve(ctx: _Context, cycle: Sequence[int]) -> tuple[CurveTrace, list[Edge]]:
    """Lexicographic shortest path from the cycle to beyond the hull:
    fewest used edges crossed first, then fewest triangulation edges.
    Returns the curve and the used edges it crosses."""
    k = len(cycle)
    own = {ekey(cycle[i], cycle[(i + 1) % k]) for i in range(k)}
    walk = DualWalk(ctx.tri, own)
    hull = set(ctx.tri.hull_edges)
    dist: dict[Edge, tuple[int, int]] = {}
    parent: dict[Edge, Edge | None] = {}
    heap = []
    for e in sorted(own, key=walk.index.__getitem__):
        dist[e] = (0, 0)
        parent[e] = None
        heap.append(((0, 0), walk.index[e], e))
    heapq.heapify(heap)
    best = None
    done: set[Edge] = set()
    while heap:
        cost, _, e = heapq.heappop(heap)
        if e in done:
            continue
        done.add(e)
        if best is not None and cost >= best[0]:
            break
        if e in hull and e not in own:
            best = (cost, e)
            continue
        for f in _all_neighbors(ctx.tri, e, own, walk):
            step = (cost[0] + (f in ctx.chosen), cost[1] + 1)
            if f not in dist or step < dist[f]:
                dist[f] = step
                parent[f] = e
                heapq.heappush(heap, (step, walk.index[f], f))
    if best is None:
        raise NoTwoCrossingPathError("no path from the hole to the hull")
    bends = _chain(parent, best[1])[::-1]
    used = [f for f in bends[1:] if f in ctx.chosen]
    return ctx.trace(bends, start_vertex=bends[0][0]), used


def _all_neighbors(t: Triangulation, e: Edge, blocked: set[Edge], walk: DualWalk) -> list[Edge]:
    # crossing used edges is allowed here; only the hole's own edges block
    out = set()
    for ti in t.edge_triangles[e]:
        a, b, c = t.triangles[ti]
        for f in (ekey(a, b), ekey(b, c), ekey(c, a)):
            if f != e and f not in blocked:
                out.add(f)
    return sorted(out, key=walk.index.__getitem__)


def hih_cut(solution: EdgeSolution, cycle: Sequence[int], ctx: _Context | None = None) -> Cut:
    """sum_{delta(V_H)} x_e + sum_{X(P) - {e1, e2}} x_e - x_e1 - x_e2 >= -1
    for a hole H at depth >= 2 and a curve P from H to the hull that
    crosses exactly the two used edges e1, e2."""
    inst = solution.instance
    ctx = ctx or _Context(inst, solution.chosen)
    d = extract_cycles(solution)
    forest = build_nesting_forest(d)
    k = d.cycle_of[cycle[0]]
    if forest.depth[k] < 2:
        raise ValueError("hole-in-hole cuts need a cycle at depth >= 2")
    curve, used = hih_curve(ctx, d.cycles[k])
    if len(used) != 2:
        raise NoTwoCrossingPathError(f"best curve crosses {len(used)} used edges")
    verts = set(d.cycles[k])
    coeffs = {e: 1 for e in curve.crossed_edges if e[0] not in verts and e[1] not in verts}
    for e in used:
        coeffs[e] = -1
    coeffs.update({e: 1 for e in _delta(inst, verts)})
    return Cut.of(coeffs, ">=", -1, CutKind.HIH)


# ---------------------------------------------------------------------------
# dispatch


def separate(solution: EdgeSolution, config: CutConfig = CutConfig()) -> list[Cut]:
    """Cuts violated by an integral degree-2 selection that is not a
    polygon.  Raises NotSeparableError if the selection is feasible."""
    inst = solution.instance
    pts = inst.points
    cuts: list[Cut] = []
    d = extract_cycles(solution)
    crossings = sorted(crossing_pairs(pts, solution.chosen))
    if crossings:
        if config.crossing:
            cuts += [crossing_pair_cut(inst, e, f) for e, f in crossings]
        else:
            # no-good cut on the cycles involved in each crossing
            seen = set()
            for e, f in crossings:
                ks = tuple(sorted({d.cycle_of[e[0]], d.cycle_of[f[0]]}))
                if ks in seen:
                    continue
                seen.add(ks)
                edges = [x for k in ks for x in d.edges(k)]
                cuts.append(Cut.of({x: 1 for x in edges}, "<=", len(edges) - 1, CutKind.SUBTOUR))
        return _dedupe(cuts)
    forest = build_nesting_forest(d)
    cls = classify(d, forest)
    n = inst.n
    for k, c in enumerate(cls.classes):
        cyc = d.cycles[k]
        if c is CycleClass.INVALID_P1:
            cuts.append(subtour_cut_for(cyc, n) if config.dsc else cycle_cut(cyc))
        elif c in (CycleClass.INVALID_P2, CycleClass.INVALID_P3):
            cuts.append(cycle_cut(cyc))
    ctx = _Context(inst, solution.chosen)
    hull = set(inst.hull)
    if config.glue and sum(any(v in hull for v in cyc) for cyc in d.cycles) >= 2:
        try:
            cuts.append(glue_cut(solution, ctx))
        except NoCurveError:
            pass
    if config.tail:
        for k, cyc in enumerate(d.cycles):
            if forest.parent[k] is None and not any(v in hull for v in cyc):
                try:
                    cuts.append(tail_cut(solution, cyc, ctx))
                except NoCurveError:
                    pass
    if config.hih:
        for k, cyc in enumerate(d.cycles):
            if forest.depth[k] == 2:
                try:
                    cuts.append(hih_cut(solution, cyc, ctx))
                except NoTwoCrossingPathError:
                    pass
    if not cuts:
        if is_feasible(solution):
            raise NotSeparableError("selection is a feasible polygon")
        raise NotSeparableError("no cut family applies to this selection")
    return _dedupe(cuts)


def _dedupe(cuts: list[Cut]) -> list[Cut]:
    order = {k: i for i, k in enumerate(CutKind)}
    seen = set()
    out = []
    for c in sorted(cuts, key=lambda c: (order[c.kind], c.coeffs, c.rhs)):
        if c.key not in seen:
            seen.add(c.key)
            out.append(c)
    return out
