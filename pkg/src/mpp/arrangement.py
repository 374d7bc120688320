"""From an integral edge selection to cycles, their nesting forest, the
validity class of every cycle, and the overall feasibility verdict.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import CrossingCyclesError, DegreeViolationError
from .geometry import Location, exact_signed_area2, point_in_cycle, segments_properly_cross, strictly_inside_segment
from .instances import Instance

Edge = tuple[int, int]


def ekey(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class EdgeSolution:
    instance: Instance
    chosen: frozenset[Edge]

    def __post_init__(self):
        object.__setattr__(self, "chosen", frozenset(ekey(*e) for e in self.chosen))

    @property
    def objective(self) -> float:
        return self.instance.length(self.chosen)

    @classmethod
    def from_cycles(cls, instance: Instance, cycles: Iterable[Sequence[int]]) -> EdgeSolution:
        chosen = set()
        for c in cycles:
            chosen.update(ekey(c[i], c[(i + 1) % len(c)]) for i in range(len(c)))
        return cls(instance, frozenset(chosen))


@dataclass(frozen=True)
class CycleDecomposition:
    instance: Instance
    cycles: tuple[tuple[int, ...], ...]
    cycle_of: dict[int, int] = field(compare=False, repr=False)

    def coords(self, k: int) -> list:
        pts = self.instance.points
        return [pts[v] for v in self.cycles[k]]

    def edges(self, k: int) -> list[Edge]:
        c = self.cycles[k]
        return [ekey(c[i], c[(i + 1) % len(c)]) for i in range(len(c))]


@dataclass(frozen=True)
class NestingForest:
    parent: tuple[int | None, ...]
    children: tuple[tuple[int, ...], ...]
    depth: tuple[int, ...]

    @property
    def roots(self) -> list[int]:
        return [k for k, p in enumerate(self.parent) if p is None]

    @property
    def edge_count(self) -> int:
        return sum(p is not None for p in self.parent)

    def descendants(self, k: int) -> list[int]:
        out, stack = [], list(self.children[k])
        while stack:
            c = stack.pop()
            out.append(c)
            stack.extend(self.children[c])
        return out


class CycleClass(enum.Enum):
    OUTER_CANDIDATE = "outer_candidate"
    HOLE_CANDIDATE = "hole_candidate"
    INVALID_P1 = "invalid_p1"
    INVALID_P2 = "invalid_p2"
    INVALID_P3 = "invalid_p3"


@dataclass(frozen=True)
class Classification:
    classes: tuple[CycleClass, ...]
    hole_in_hole: tuple[int, ...]

    def of(self, cls: CycleClass) -> list[int]:
        return [k for k, c in enumerate(self.classes) if c is cls]


@dataclass(frozen=True)
class PolygonWithHoles:
    """Outer boundary counterclockwise, holes clockwise, as vertex-id cycles."""

    instance: Instance
    outer: tuple[int, ...]
    holes: tuple[tuple[int, ...], ...]

    @property
    def cycles(self) -> list[tuple[int, ...]]:
        return [self.outer, *self.holes]

    @property
    def edges(self) -> frozenset[Edge]:
        return EdgeSolution.from_cycles(self.instance, self.cycles).chosen

    @property
    def length(self) -> float:
        return self.instance.length(self.edges)


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    polygon: PolygonWithHoles | None
    violations: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.feasible


# ---------------------------------------------------------------------------


def degrees(n: int, edges: Iterable[Edge]) -> list[int]:
    deg = [0] * n
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    return deg


def extract_cycles(s: EdgeSolution) -> CycleDecomposition:
    """Split a degree-2 edge set into cycles.  Each cycle starts at its
    smallest vertex and continues towards the smaller of its two
    neighbours; cycles are ordered by their first vertex."""
    n = s.instance.n
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in sorted(s.chosen):
        adj[u].append(v)
        adj[v].append(u)
    for v in range(n):
        if len(adj[v]) != 2:
            raise DegreeViolationError(v, len(adj[v]))
    cycles = []
    cycle_of: dict[int, int] = {}
    for start in range(n):
        if start in cycle_of:
            continue
        cyc = [start]
        prev, cur = start, min(adj[start])
        while cur != start:
            cyc.append(cur)
            a, b = adj[cur]
            prev, cur = cur, (b if a == prev else a)
        for v in cyc:
            cycle_of[v] = len(cycles)
        cycles.append(tuple(cyc))
    return CycleDecomposition(s.instance, tuple(cycles), cycle_of)


def crossing_pairs(points: Sequence, edges: Iterable[Edge]) -> set[tuple[Edge, Edge]]:
    """All pairs of edges that properly cross or overlap, each pair sorted.

    Sweeps the edges by x-extent so only boxes that overlap are tested.
    """
    items = []
    for e in sorted(set(ekey(*e) for e in edges)):
        a, b = points[e[0]], points[e[1]]
        items.append((min(a[0], b[0]), max(a[0], b[0]), min(a[1], b[1]), max(a[1], b[1]), e))
    items.sort()
    out = set()
    for i, (x0, x1, y0, y1, e) in enumerate(items):
        for j in range(i + 1, len(items)):
            u0, u1, w0, w1, f = items[j]
            if u0 > x1:
                break
            if w0 > y1 or w1 < y0 or set(e) & set(f) and _shares_only_endpoint(points, e, f):
                continue
            if segments_properly_cross((points[e[0]], points[e[1]]), (points[f[0]], points[f[1]])):
                out.add((e, f) if e < f else (f, e))
    return out


def _shares_only_endpoint(points, e: Edge, f: Edge) -> bool:
    # edges sharing a vertex can still overlap collinearly
    if e == f:
        return True
    shared = (set(e) & set(f)).pop()
    a = e[0] if e[1] == shared else e[1]
    b = f[0] if f[1] == shared else f[1]
    pa, pb, ps = points[a], points[b], points[shared]
    return not (strictly_inside_segment(pa, ps, pb) or strictly_inside_segment(pb, ps, pa))


def find_crossings(s: EdgeSolution) -> set[tuple[Edge, Edge]]:
    return crossing_pairs(s.instance.points, s.chosen)


def edges_through_vertices(points: Sequence, edges: Iterable[Edge]) -> list[tuple[Edge, int]]:
    """(edge, vertex) pairs where a vertex lies strictly inside an edge."""
    out = []
    for u, v in edges:
        a, b = points[u], points[v]
        lo_x, hi_x = sorted((a[0], b[0]))
        lo_y, hi_y = sorted((a[1], b[1]))
        for p in points:
            if lo_x <= p[0] <= hi_x and lo_y <= p[1] <= hi_y and p[2] not in (u, v) \
                    and strictly_inside_segment(p, a, b):
                out.append(((u, v), p[2]))
    return out


def _encloses(d: CycleDecomposition, outer: int, inner: int) -> bool:
    poly = d.coords(outer)
    for v in d.cycles[inner]:
        loc = point_in_cycle(d.instance.points[v], poly, check_simple=False)
        if loc is not Location.ON_BOUNDARY:
            return loc is Location.INSIDE
    return False


def build_nesting_forest(d: CycleDecomposition) -> NestingForest:
    pts = d.instance.points
    all_edges = [e for k in range(len(d.cycles)) for e in d.edges(k)]
    if crossing_pairs(pts, all_edges):
        raise CrossingCyclesError("cycles cross; nesting is undefined")
    k = len(d.cycles)
    # bounding boxes prune most enclosure tests
    boxes = []
    for c in range(k):
        xs = [pts[v][0] for v in d.cycles[c]]
        ys = [pts[v][1] for v in d.cycles[c]]
        boxes.append((min(xs), max(xs), min(ys), max(ys)))
    enclosers: list[list[int]] = [[] for _ in range(k)]
    for a in range(k):
        ax0, ax1, ay0, ay1 = boxes[a]
        for b in range(k):
            if a == b:
                continue
            bx0, bx1, by0, by1 = boxes[b]
            if bx0 < ax0 or bx1 > ax1 or by0 < ay0 or by1 > ay1:
                continue
            if _encloses(d, a, b):
                enclosers[b].append(a)
    depth = tuple(len(e) for e in enclosers)
    parent: list[int | None] = []
    for b in range(k):
        # tightest encloser: the one that is itself most deeply nested
        parent.append(max(enclosers[b], key=lambda a: (depth[a], -a)) if enclosers[b] else None)
    children: list[list[int]] = [[] for _ in range(k)]
    for b, p in enumerate(parent):
        if p is not None:
            children[p].append(b)
    return NestingForest(tuple(parent), tuple(tuple(c) for c in children), depth)


def classify(d: CycleDecomposition, f: NestingForest, hull: Sequence[int] | None = None) -> Classification:
    hull_set = set(d.instance.hull if hull is None else hull)
    h = len(hull_set)
    classes = []
    for k, cyc in enumerate(d.cycles):
        on_hull = sum(v in hull_set for v in cyc)
        if 1 <= on_hull <= h - 1:
            classes.append(CycleClass.INVALID_P1)
        elif on_hull == h:
            if len(f.descendants(k)) == len(d.cycles) - 1:
                classes.append(CycleClass.OUTER_CANDIDATE)
            else:
                classes.append(CycleClass.INVALID_P2)
        elif f.children[k]:
            classes.append(CycleClass.INVALID_P3)
        else:
            classes.append(CycleClass.HOLE_CANDIDATE)
    hih = tuple(k for k, c in enumerate(classes) if c is CycleClass.HOLE_CANDIDATE and f.depth[k] >= 2)
    return Classification(tuple(classes), hih)


def is_feasible(s: EdgeSolution) -> Feasibility:
    inst = s.instance
    pts = inst.points
    bad: list[str] = []
    for u, v in s.chosen:
        if not (0 <= u < inst.n and 0 <= v < inst.n) or u == v:
            return Feasibility(False, None, (f"invalid edge ({u}, {v})",))
    for v, deg in enumerate(degrees(inst.n, s.chosen)):
        if deg != 2:
            bad.append(f"vertex {v} has degree {deg}")
    for (u, v), w in edges_through_vertices(pts, s.chosen):
        bad.append(f"edge ({u}, {v}) passes through vertex {w}")
    for e, f in sorted(find_crossings(s)):
        bad.append(f"edges {e} and {f} cross")
    if bad:
        return Feasibility(False, None, tuple(bad))
    d = extract_cycles(s)
    forest = build_nesting_forest(d)
    cls = classify(d, forest)
    outers = cls.of(CycleClass.OUTER_CANDIDATE)
    for k, c in enumerate(cls.classes):
        if c is CycleClass.HOLE_CANDIDATE and forest.depth[k] >= 2:
            bad.append(f"cycle {k} is a hole inside a hole")
        elif c not in (CycleClass.OUTER_CANDIDATE, CycleClass.HOLE_CANDIDATE):
            bad.append(f"cycle {k} is {c.name}")
    if len(outers) != 1 and not bad:
        bad.append(f"{len(outers)} outer cycles")
    for k, cyc in enumerate(d.cycles):
        if exact_signed_area2(d.coords(k)) == 0:
            bad.append(f"cycle {k} has zero area")
    if bad:
        return Feasibility(False, None, tuple(bad))
    outer = _oriented(d, outers[0], ccw=True)
    holes = tuple(_oriented(d, k, ccw=False) for k in range(len(d.cycles)) if k != outers[0])
    return Feasibility(True, PolygonWithHoles(inst, outer, holes), ())


def _oriented(d: CycleDecomposition, k: int, ccw: bool) -> tuple[int, ...]:
    cyc = d.cycles[k]
    if (exact_signed_area2(d.coords(k)) > 0) != ccw:
        cyc = (cyc[0],) + tuple(reversed(cyc[1:]))
    return cyc
