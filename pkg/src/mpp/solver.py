"""Cutting-plane driver, Delaunay jumpstart and the exhaustive oracle."""

from __future__ import annotations

import logging
import math
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator

from .arrangement import EdgeSolution, PolygonWithHoles, is_feasible
from .errors import MPPError, TooLargeError, UnsatisfiableDegreeError
from .geometry import segments_properly_cross
from .instances import Instance
from .ip import Backend, Cut, HighsBackend, Status, build_model, ekey, solve_integral
from .separation import CutConfig, separate
from .triangulation import delaunay

log = logging.getLogger(__name__)

Edge = tuple[int, int]


@dataclass(frozen=True)
class SolveConfig:
    cuts: CutConfig = CutConfig()
    jumpstart: bool = True
    time_limit: float | None = None
    max_rounds: int | None = None      # default 10 * n
    backend: Backend | None = None
    seed: int = 0

    def rounds_cap(self, n: int) -> int:
        return 10 * n if self.max_rounds is None else self.max_rounds


@dataclass
class SolveReport:
    status: Status
    objective: float | None
    polygon: PolygonWithHoles | None
    iterations: int
    cuts_by_kind: dict[str, int]
    wall_time: float
    jumpstart_objective: float | None = None
    jumpstart_iterations: int = 0
    cuts: list[Cut] = field(default_factory=list, repr=False)
    chosen: frozenset[Edge] | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {
            "status": self.status.value,
            "objective": self.objective,
            "iterations": self.iterations,
            "cuts": dict(self.cuts_by_kind),
            "wall_ms": round(self.wall_time * 1000.0, 3),
            "jumpstart_objective": self.jumpstart_objective,
        }


@dataclass
class _Loop:
    status: Status
    chosen: frozenset[Edge] | None
    rounds: int


class _Session:
    """Shared cut pool and clock for one solve."""

    def __init__(self, inst: Instance, config: SolveConfig):
        self.inst = inst
        self.config = config
        self.backend = config.backend or HighsBackend()
        self.pool: list[Cut] = []
        self.start = time.perf_counter()
        self.deadline = None if config.time_limit is None else self.start + config.time_limit

    def remaining(self) -> float | None:
        if self.deadline is None:
            return None
        return self.deadline - time.perf_counter()

    def run(self, edges, incumbent: frozenset[Edge] | None) -> _Loop:
        inst = self.inst
        model = build_model(inst, edges)
        model.incumbent = incumbent
        for c in self.pool:
            model.add_cut(c)
        best = None if incumbent is None else inst.length(incumbent)
        cap = self.config.rounds_cap(inst.n)
        rounds = 0
        while True:
            left = self.remaining()
            if left is not None and left <= 0:
                return _Loop(Status.TIME_LIMIT, incumbent, rounds)
            res = solve_integral(model, self.backend, left)
            if res.status is Status.TIME_LIMIT:
                return _Loop(Status.TIME_LIMIT, incumbent, rounds)
            if res.status is Status.INFEASIBLE:
                # the cutoff row can only exclude solutions no better than the incumbent
                if incumbent is not None:
                    return _Loop(Status.OPTIMAL, incumbent, rounds)
                return _Loop(Status.INFEASIBLE, None, rounds)
            if best is not None and res.objective >= best - 1e-9 * max(1.0, abs(best)):
                return _Loop(Status.OPTIMAL, incumbent, rounds)
            sol = EdgeSolution(inst, res.chosen)
            if is_feasible(sol):
                return _Loop(Status.OPTIMAL, res.chosen, rounds)
            if rounds >= cap:
                return _Loop(Status.TIME_LIMIT, incumbent, rounds)
            added = [c for c in separate(sol, self.config.cuts) if model.add_cut(c)]
            if not added:
                raise MPPError("separation returned only cuts already in the pool")
            self.pool += added
            rounds += 1
            log.debug("round %d: objective %.6f, %d cuts", rounds, res.objective, len(added))


def _polygon(inst: Instance, chosen) -> PolygonWithHoles | None:
    if chosen is None:
        return None
    return is_feasible(EdgeSolution(inst, chosen)).polygon


def delaunay_edges(inst: Instance) -> list[Edge]:
    cand = set(inst.candidate_edges)
    return [e for e in delaunay(inst.points).edges if e in cand]


def jumpstart(instance: Instance, config: SolveConfig = SolveConfig()) -> EdgeSolution | None:
    """Optimum over the Delaunay edges, or None when that edge set admits
    no polygon (or the budget runs out first)."""
    found, _ = _jumpstart(_Session(instance, config))
    return None if found is None else EdgeSolution(instance, found)


def _jumpstart(session: _Session) -> tuple[frozenset[Edge] | None, int]:
    try:
        out = session.run(delaunay_edges(session.inst), None)
    except UnsatisfiableDegreeError:
        return None, 0
    if out.status is Status.OPTIMAL:
        return out.chosen, out.rounds
    return None, out.rounds


def solve(instance: Instance, config: SolveConfig = SolveConfig()) -> SolveReport:
    session = _Session(instance, config)
    js_chosen, js_rounds = (None, 0)
    if config.jumpstart:
        js_chosen, js_rounds = _jumpstart(session)
    out = session.run(None, js_chosen)
    chosen = out.chosen
    return SolveReport(
        status=out.status if chosen is not None or out.status is not Status.OPTIMAL else Status.INFEASIBLE,
        objective=None if chosen is None else instance.length(chosen),
        polygon=_polygon(instance, chosen),
        iterations=out.rounds,
        cuts_by_kind=dict(Counter(c.kind.value for c in session.pool)),
        wall_time=time.perf_counter() - session.start,
        jumpstart_objective=None if js_chosen is None else instance.length(js_chosen),
        jumpstart_iterations=js_rounds,
        cuts=list(session.pool),
        chosen=chosen,
    )


# ---------------------------------------------------------------------------
# exhaustive oracle

ORACLE_MAX_N = 12


@dataclass(frozen=True)
class OracleResult:
    objective: float
    polygon: PolygonWithHoles
    chosen: frozenset[Edge]


def enumerate_feasible(instance: Instance, bound: float | None = None) -> Iterator[EdgeSolution]:
    """Every feasible polygon (as an edge set), or only those not longer
    than `bound`.  Exponential; meant for n <= ORACLE_MAX_N."""
    if instance.n > ORACLE_MAX_N:
        raise TooLargeError(f"enumeration supports n <= {ORACLE_MAX_N}, got {instance.n}")
    for chosen in _cycle_covers(instance, bound):
        sol = EdgeSolution(instance, chosen)
        if is_feasible(sol):
            yield sol


def _cycle_covers(inst: Instance, bound: float | None) -> Iterator[frozenset[Edge]]:
    # Cycles are grown one at a time from the lowest uncovered vertex.
    # Branches are cut when an edge crosses an earlier one, when a closed
    # cycle holds some but not all hull points, or when the partial length
    # already exceeds the bound.
    n = inst.n
    pts = inst.points
    cand = set(inst.candidate_edges)
    adj = [[v for v in range(n) if v != u and ekey(u, v) in cand] for u in range(n)]
    hull = set(inst.hull)
    h = len(hull)
    cost = [[inst.cost(u, v) if u != v else 0.0 for v in range(n)] for u in range(n)]
    limit = math.inf if bound is None else bound + 1e-9 * max(1.0, abs(bound))
    used: list[Edge] = []
    covered = [False] * n
    state = {"hull_cycle": False}

    def crosses(e: Edge) -> bool:
        a, b = pts[e[0]], pts[e[1]]
        return any(segments_properly_cross((a, b), (pts[f[0]], pts[f[1]])) for f in used)

    def grow(path: list[int], length: float) -> Iterator[frozenset[Edge]]:
        start, last = path[0], path[-1]
        for v in adj[last]:
            if len(path) >= 3 and v == start:
                if path[1] > path[-1]:
                    continue  # each cycle once, not in both directions
                e = ekey(last, start)
                if length + cost[last][start] > limit or crosses(e):
                    continue
                on_hull = sum(w in hull for w in path)
                if on_hull not in (0, h) or (on_hull == h and state["hull_cycle"]):
                    continue
                used.append(e)
                was = state["hull_cycle"]
                state["hull_cycle"] = was or on_hull == h
                yield from cover(length + cost[last][start])
                state["hull_cycle"] = was
                used.pop()
            elif not covered[v] and v > start:
                e = ekey(last, v)
                if length + cost[last][v] > limit or crosses(e):
                    continue
                covered[v] = True
                used.append(e)
                path.append(v)
                yield from grow(path, length + cost[last][v])
                path.pop()
                used.pop()
                covered[v] = False

    def cover(length: float) -> Iterator[frozenset[Edge]]:
        try:
            s = covered.index(False)
        except ValueError:
            if state["hull_cycle"]:
                yield frozenset(used)
            return
        covered[s] = True
        yield from grow([s], length)
        covered[s] = False

    yield from cover(0.0)


def oracle(instance: Instance, bound: float | None = None) -> OracleResult:
    """Exact optimum by exhaustive enumeration (n <= ORACLE_MAX_N)."""
    if instance.n > ORACLE_MAX_N:
        raise TooLargeError(f"oracle supports n <= {ORACLE_MAX_N}, got {instance.n}")
    if bound is None:
        from .approx import approximate
        bound = approximate(instance).polygon.length
    best: EdgeSolution | None = None
    best_len = math.inf
    for sol in enumerate_feasible(instance, bound):
        length = instance.length(sol.chosen)
        if length < best_len - 1e-12:
            best, best_len = sol, length
    if best is None:
        raise MPPError("no polygon within the bound")
    return OracleResult(best_len, is_feasible(best).polygon, best.chosen)
