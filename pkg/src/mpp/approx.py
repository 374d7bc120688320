"""Factor-3 approximation: convex hull as the outer boundary, a minimum
2-factor of the interior points as holes, then two repair phases that
remove nesting (phase 1) and repeated vertices (phase 2).

All walks are counterclockwise with their region on the left.  A phase-1
step replaces a cycle P that surrounds leaf cycles by the closed walk
"taut path p->q around the children, then P's boundary from q back to p",
which turns the parent and its children into siblings.  A phase-2
operation takes a corner a-p-b whose inner side is a convex sector free of
edges and replaces it by the taut path from a to b; depending on whose
sector it is, this shrinks a walk (cutting off a pinch) or glues two
walks together (closing the gap between them).  Both strictly shorten.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

from .arrangement import CycleDecomposition, EdgeSolution, PolygonWithHoles, build_nesting_forest, is_feasible
from .errors import DegenerateError, MPPError
from .geodesic import boundary_geodesic, corner_chain
from .geometry import exact_signed_area2, is_simple_cycle, orient2d
from .instances import Instance
from .matching import min_weight_two_factor


@dataclass(frozen=True)
class WeaklySimpleCycle:
    walk: tuple[int, ...]

    def length(self, inst: Instance) -> float:
        w = self.walk
        return math.fsum(inst.cost(w[i], w[(i + 1) % len(w)]) for i in range(len(w)))


@dataclass(frozen=True)
class ApproxCertificate:
    hull_perimeter: float
    two_factor_weight: float | None
    output_length: float

    @property
    def bound(self) -> float | None:
        if self.two_factor_weight is None:
            return None
        return self.hull_perimeter + 2 * self.two_factor_weight

    @property
    def holds(self) -> bool:
        return self.bound is None or self.output_length <= self.bound + 1e-9 * max(1.0, self.bound)


@dataclass(frozen=True)
class FlattenStep:
    cycle: tuple[int, ...]
    walk: tuple[int, ...]
    cycle_length: float
    walk_length: float
    forest_edges_before: int
    forest_edges_after: int     # containment pairs, not parent links


@dataclass(frozen=True)
class UntangleOp:
    kind: str            # "cut", "merge" or "split"
    corner: tuple[int, int, int]
    length_before: float
    length_after: float


@dataclass(frozen=True)
class ApproxResult:
    polygon: PolygonWithHoles
    certificate: ApproxCertificate
    phase1: tuple[FlattenStep, ...] = ()
    phase2: tuple[UntangleOp, ...] = ()

    @property
    def length(self) -> float:
        return self.certificate.output_length


def _ccw(inst: Instance, cyc: Sequence[int]) -> tuple[int, ...]:
    if exact_signed_area2([inst.points[v] for v in cyc]) < 0:
        return (cyc[0],) + tuple(reversed(cyc[1:]))
    return tuple(cyc)


def _walk_length(inst: Instance, w: Sequence[int]) -> float:
    return math.fsum(inst.cost(w[i], w[(i + 1) % len(w)]) for i in range(len(w)))


# ---------------------------------------------------------------------------
# phase 1


def _containment_pairs(par: Sequence[int | None]) -> int:
    # edges of the containment relation, i.e. the sum of node depths;
    # re-parenting k children to the grandparent drops it by k
    total = 0
    for c in range(len(par)):
        p = par[c]
        while p is not None:
            total += 1
            p = par[p]
    return total


def phase1_flatten(inst: Instance, cycles: Sequence[Sequence[int]],
                   parent: Sequence[int | None] | None = None) -> tuple[list[WeaklySimpleCycle], list[FlattenStep]]:
    """Remove all nesting from a set of pairwise non-crossing simple cycles.

    `parent` is the nesting forest as parent links (computed when
    omitted).  Returns the walks, in input order, and one record per step.
    """
    walks = [_ccw(inst, c) for c in cycles]
    if parent is None:
        d = CycleDecomposition(inst, tuple(tuple(c) for c in cycles), {})
        parent = build_nesting_forest(d).parent
    par = list(parent)
    steps: list[FlattenStep] = []
    while True:
        kids: dict[int, list[int]] = {}
        for c, p in enumerate(par):
            if p is not None:
                kids.setdefault(p, []).append(c)
        ready = [v for v in sorted(kids) if all(c not in kids for c in kids[v])]
        if not ready:
            break
        v = ready[0]
        before = _containment_pairs(par)
        pv = walks[v]
        # longest edge of P_v, ties by position
        k = len(pv)
        j = max(range(k), key=lambda i: (inst.cost(pv[i], pv[(i + 1) % k]), -i))
        p, q = pv[j], pv[(j + 1) % k]
        gamma = boundary_geodesic(inst.points, pv, p, q, [walks[c] for c in kids[v]])
        # gamma p..q, then ccw along P_v from q back to p
        rest = [pv[(j + 1 + i) % k] for i in range(1, k)]
        new_walk = tuple(gamma + rest[:-1])
        for c in kids[v]:
            par[c] = par[v]
        walks[v] = new_walk
        steps.append(FlattenStep(tuple(pv), new_walk, _walk_length(inst, pv), _walk_length(inst, new_walk),
                                 before, _containment_pairs(par)))
    return [WeaklySimpleCycle(w) for w in walks], steps


# ---------------------------------------------------------------------------
# phase 2


def _turn(pts, a: int, p: int, b: int) -> int:
    return orient2d(pts[a], pts[p], pts[b])


def _convex_sector(pts, p: int, start: int, end: int) -> bool:
    """True if the ccw sector at p from ray p->start to ray p->end spans
    less than 180 degrees (zero included when both rays coincide)."""
    o = orient2d(pts[p], pts[start], pts[end])
    if o > 0:
        return True
    if o < 0:
        return False
    ds = (pts[start][0] - pts[p][0], pts[start][1] - pts[p][1])
    de = (pts[end][0] - pts[p][0], pts[end][1] - pts[p][1])
    return ds[0] * de[0] + ds[1] * de[1] > 0


def _ray_order(pts, p: int):
    """Comparator for directions p->u, p->v, counterclockwise from +x.
    Exact: only coordinate signs and orient2d are used."""
    px, py = pts[p][0], pts[p][1]

    def half(v):
        dx, dy = pts[v][0] - px, pts[v][1] - py
        return 0 if dy > 0 or (dy == 0 and dx > 0) else 1

    def cmp(u, v):
        hu, hv = half(u), half(v)
        if hu != hv:
            return hu - hv
        o = orient2d(pts[p], pts[u], pts[v])
        return -1 if o > 0 else (1 if o < 0 else 0)
    return cmp


@dataclass
class _Ray:
    vertex: int
    arrival: bool
    occ: int


class _Untangler:
    """State of phase 2: ccw closed walks, hole region on the left.

    At a repeated vertex p the edge ends around p alternate between
    departures and arrivals; the sector from a departure counterclockwise
    to the next arrival belongs to a hole, the sector from an arrival to
    the next departure is free.  Walks are first re-paired at p so that
    every occurrence owns exactly one hole sector.  Then one of three
    shortenings is applied, each replacing a convex corner a-p-b by the
    taut chain between a and b:

    * merge: a free sector between two different walks is closed;
    * cut: a convex hole sector of one occurrence is cut off;
    * split: a free sector between two occurrences in one walk is closed.
    """

    def __init__(self, inst: Instance, walks: Sequence[Sequence[int]]):
        self.inst = inst
        self.pts = inst.points
        self.walks: list[list[int]] = [list(w) for w in walks]
        self.vertices = sorted({v for w in self.walks for v in w})
        self.ops: list[UntangleOp] = []
        self.resolved: set[tuple[int, int, int]] = set()

    def total(self) -> float:
        return math.fsum(_walk_length(self.inst, w) for w in self.walks if len(w) > 1)

    def occurrences(self, p: int) -> list[tuple[int, int]]:
        return [(wi, i) for wi, w in enumerate(self.walks) for i, v in enumerate(w) if v == p]

    def repeated(self) -> list[int]:
        count: dict[int, int] = {}
        for w in self.walks:
            for v in w:
                count[v] = count.get(v, 0) + 1
        return sorted(v for v, c in count.items() if c > 1)

    def prev_next(self, wi: int, i: int) -> tuple[int, int]:
        w = self.walks[wi]
        return w[i - 1], w[(i + 1) % len(w)]

    def chain(self, a: int, p: int, b: int) -> list[int]:
        return corner_chain(self.pts, a, p, b, self.vertices)

    def run(self, max_ops: int) -> None:
        while True:
            rep = self.repeated()
            if not rep:
                return
            if len(self.ops) >= max_ops:
                raise MPPError("phase 2 did not terminate")
            p = rep[0]
            before = self.total()
            kind, corner = self.resolve(p)
            after = self.total()
            if not after < before:
                raise MPPError(f"phase-2 {kind} at {corner} did not shorten the walks")
            self.ops.append(UntangleOp(kind, corner, before, after))

    # -- local structure at p

    def rays(self, p: int) -> tuple[list[tuple[int, int]], list[_Ray]]:
        """Occurrences of p and the edge ends around p in ccw order,
        starting with a departure and alternating with arrivals.

        Coincident rays come from a doubled edge, and the zero-width sector
        between them may be hole (a sliver) or free (a slit).  Of the
        orders that alternate, the one keeping most of the current
        arrival-departure pairs is used.
        """
        occ = self.occurrences(p)
        rays = []
        for k, (wi, i) in enumerate(occ):
            a, b = self.prev_next(wi, i)
            rays.append(_Ray(b, False, k))
            rays.append(_Ray(a, True, k))
        cmp = _ray_order(self.pts, p)
        rays.sort(key=lambda r: (functools.cmp_to_key(cmp)(r.vertex), r.arrival, r.occ))
        groups: list[list[_Ray]] = []
        for r in rays:
            if groups and cmp(groups[-1][0].vertex, r.vertex) == 0:
                groups[-1].append(r)
            else:
                groups.append([r])
        best = None
        for choice in itertools.islice(itertools.product(*(itertools.permutations(g) for g in groups)), 4096):
            order = [r for g in choice for r in g]
            start = next(t for t, r in enumerate(order) if not r.arrival)
            order = order[start:] + order[:start]
            if any(r.arrival != (t % 2 == 1) for t, r in enumerate(order)):
                continue
            kept = sum(order[t].occ == order[t + 1].occ for t in range(0, len(order), 2))
            if best is None or kept > best[0]:
                best = (kept, order)
        if best is None:
            raise MPPError(f"walks cross at vertex {p}")
        return occ, best[1]

    def normalize(self, p: int) -> list[tuple[int, int]]:
        """Re-pair the walk pieces through p so that each arrival continues
        with the departure immediately clockwise of it.  Returns the new
        occurrences of p in ccw order of their hole sectors."""
        occ, rays = self.rays(p)
        touched = {wi for wi, _ in occ}
        # strands: from the departure of an occurrence to the arrival of the
        # next occurrence of p along the same walk
        strand_of_dep: dict[int, list[int]] = {}
        end_occ: dict[int, int] = {}
        for k, (wi, i) in enumerate(occ):
            w = self.walks[wi]
            n = len(w)
            t = 1
            while w[(i + t) % n] != p:
                t += 1
            strand_of_dep[k] = [w[(i + s) % n] for s in range(1, t)]
            end_occ[k] = occ.index((wi, (i + t) % n))
        # the arrival ray at position t+1 continues with the departure at t
        follow: dict[int, int] = {}
        sector_of_dep: dict[int, int] = {}
        for t in range(0, len(rays), 2):
            follow[rays[t + 1].occ] = rays[t].occ
            sector_of_dep[rays[t].occ] = t // 2
        kept = [w for wi, w in enumerate(self.walks) if wi not in touched]
        where: list[tuple[int, int]] = [(-1, -1)] * (len(rays) // 2)
        seen: set[int] = set()
        for k in range(len(occ)):
            if k in seen:
                continue
            walk: list[int] = []
            cur = k
            while cur not in seen:
                seen.add(cur)
                where[sector_of_dep[cur]] = (len(kept), len(walk))
                walk.append(p)
                walk.extend(strand_of_dep[cur])
                cur = follow[end_occ[cur]]
            kept.append(walk)
        self.walks = kept
        return where

    # -- operations

    def resolve(self, p: int) -> tuple[str, tuple[int, int, int]]:
        sectors = self.normalize(p)
        m = len(sectors)
        corners = []  # (kind, a, b, occurrence of a, occurrence of b)
        for o in sectors:
            a, b = self.prev_next(*o)
            if a == b or _turn(self.pts, a, p, b) > 0:
                corners.append(("cut", a, b, o, o))
        for k in range(m):
            oa, ob = sectors[k], sectors[(k + 1) % m]
            a, b = self.prev_next(*oa)[0], self.prev_next(*ob)[1]
            if a == b or _convex_sector(self.pts, p, a, b):
                corners.append(("split" if oa[0] == ob[0] else "merge", a, b, oa, ob))
        rank = {"merge": 0, "cut": 1, "split": 2}
        corners.sort(key=lambda c: rank[c[0]])
        for kind, a, b, oa, ob in corners:
            walks = self.apply(kind, p, a, b, oa, ob)
            if walks is not None:
                self.walks = walks
                self._mark((a, p, b))
                return kind, (a, p, b)
        raise MPPError(f"no admissible phase-2 operation at vertex {p}")

    def apply(self, kind: str, p: int, a: int, b: int, oa: tuple[int, int], ob: tuple[int, int]):
        """Walks after replacing a-p-b by the taut chain, or None if the
        result would contain a degenerate walk."""
        mid = self.chain(a, p, b) if a != b else []
        walks = [list(w) for w in self.walks]
        wa, ia = oa
        wb, ib = ob
        if kind == "cut":
            w = walks[wa]
            n = len(w)
            rest = [w[(ia + t) % n] for t in range(1, n)]  # b ... a
            new = rest + mid if a != b else rest[:-1]
            out = [new]
        elif kind == "merge":
            W1, W2 = walks[wa], walks[wb]
            part1 = [W1[(ia + 1 + t) % len(W1)] for t in range(len(W1) - 1)]  # after p ... a
            part2 = [W2[(ib + 1 + t) % len(W2)] for t in range(len(W2))]      # b ... p
            new = part1 + mid + part2 if a != b else part1 + part2[1:]
            out = [new]
        else:
            w = walks[wa]
            n = len(w)
            # ... a p(ia) ... p(ib) b ...: the piece after ia up to ib keeps
            # p, the piece b ... a is closed through the chain
            loop = [p] + [w[(ia + t) % n] for t in range(1, (ib - ia) % n)]
            tail = [w[(ib + t) % n] for t in range(1, (ia - ib) % n)]  # b .. a
            rest = tail + mid if a != b else tail[:-1]
            out = [loop, rest]
        keep = [w for k, w in enumerate(walks) if k not in (wa, wb)]
        for w in out:
            w = _collapse(w)
            if len(w) < 3:
                return None
            keep.append(w)
        return keep

    def _mark(self, triple: tuple[int, int, int]) -> None:
        if triple in self.resolved:
            raise MPPError(f"corner {triple} resolved twice")
        self.resolved.add(triple)


def _collapse(w: list[int]) -> list[int]:
    return [v for i, v in enumerate(w) if v != w[i - 1]] if len(w) > 1 else list(w)


def phase2_untangle(inst: Instance, walks: Sequence[WeaklySimpleCycle | Sequence[int]],
                    max_ops: int | None = None) -> tuple[list[tuple[int, ...]], list[UntangleOp]]:
    """Remove repeated vertices by strictly shortening local operations.
    Returns simple, pairwise vertex-disjoint ccw cycles and the operation
    log."""
    raw = [w.walk if isinstance(w, WeaklySimpleCycle) else tuple(w) for w in walks]
    u = _Untangler(inst, raw)
    u.run(max_ops if max_ops is not None else 50 * max(1, len(u.vertices)) ** 2)
    return [tuple(w) for w in u.walks], u.ops


# ---------------------------------------------------------------------------
# driver


def _insertions(inst: Instance) -> PolygonWithHoles:
    """Best simple polygon through all points when at most two are interior."""
    hull = list(inst.hull)
    extra = list(inst.interior)
    best = None
    h = len(hull)
    cands = []
    if len(extra) == 1:
        for i in range(h):
            cands.append(hull[:i + 1] + extra + hull[i + 1:])
    else:
        u, v = extra
        for i in range(h):
            for order in ((u, v), (v, u)):
                cands.append(hull[:i + 1] + list(order) + hull[i + 1:])
        for i, j in itertools.permutations(range(h), 2):
            c = hull[:]
            # insert u after hull[i] and v after hull[j]
            c.insert(j + 1, v)
            c.insert(i + 1 + (1 if j < i else 0), u)
            cands.append(c)
    for c in cands:
        if not is_simple_cycle([inst.points[v] for v in c]):
            continue
        length = _walk_length(inst, c)
        if best is None or length < best[0] - 1e-12:
            best = (length, tuple(c))
    if best is None:
        raise DegenerateError("no simple polygon through the points")
    return PolygonWithHoles(inst, _ccw(inst, best[1]), ())


def approximate(inst: Instance) -> ApproxResult:
    hull = inst.hull
    interior = inst.interior
    hp = inst.hull_perimeter
    if not interior:
        poly = PolygonWithHoles(inst, tuple(hull), ())
        return ApproxResult(poly, ApproxCertificate(hp, 0.0, poly.length))
    if len(interior) <= 2:
        poly = _insertions(inst)
        return ApproxResult(poly, ApproxCertificate(hp, None, poly.length))
    tf = min_weight_two_factor(inst, interior, inst.candidate_edges)
    walks, steps = phase1_flatten(inst, tf.cycles)
    holes, ops = phase2_untangle(inst, walks)
    outer = tuple(hull)
    polygon_cycles = [outer] + [tuple(reversed(h)) for h in holes]
    sol = EdgeSolution.from_cycles(inst, polygon_cycles)
    check = is_feasible(sol)
    if not check.feasible:
        raise MPPError("approximation produced an infeasible polygon: " + "; ".join(check.violations[:5]))
    poly = check.polygon
    return ApproxResult(poly, ApproxCertificate(hp, tf.weight, poly.length), tuple(steps), tuple(ops))
