"""Integer program over edge variables and the integral-solver backends.

The model has one binary variable per allowed edge, one degree equation per
vertex and a growing pool of cuts.  Cuts are stored over vertex pairs, not
variable positions, so one pool serves models on different edge sets (the
Delaunay jumpstart model and the full model share their cuts).
"""

from __future__ import annotations

import enum
import heapq
import math
import re
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp
from scipy.sparse import csr_matrix, vstack

from .errors import BackendFailure, ParseError, UnsatisfiableDegreeError
from .instances import Instance

Edge = tuple[int, int]

INTEGRALITY_TOL = 1e-6


def ekey(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class CutKind(enum.Enum):
    SUBTOUR = "subtour"
    DSC = "dsc"
    GLUE = "glue"
    TAIL = "tail"
    HIH = "hih"
    CROSSING = "crossing"


@dataclass(frozen=True)
class Cut:
    """sum(coef * x_e) (>= or <=) rhs over vertex pairs e."""

    coeffs: tuple[tuple[Edge, int], ...]
    sense: str
    rhs: int
    kind: CutKind

    def __post_init__(self):
        if self.sense not in (">=", "<="):
            raise ValueError(f"bad sense {self.sense!r}")
        merged: dict[Edge, int] = {}
        for e, c in self.coeffs:
            e = ekey(*e)
            merged[e] = merged.get(e, 0) + c
        object.__setattr__(self, "coeffs", tuple(sorted((e, c) for e, c in merged.items() if c != 0)))

    @classmethod
    def of(cls, coeffs: dict[Edge, int] | Iterable[tuple[Edge, int]], sense: str, rhs: int, kind: CutKind) -> Cut:
        items = coeffs.items() if isinstance(coeffs, dict) else coeffs
        return cls(tuple(items), sense, rhs, kind)

    def lhs(self, chosen: Iterable[Edge]) -> int:
        s = {ekey(*e) for e in chosen}
        return sum(c for e, c in self.coeffs if e in s)

    def satisfied_by(self, chosen: Iterable[Edge]) -> bool:
        v = self.lhs(chosen)
        return v >= self.rhs if self.sense == ">=" else v <= self.rhs

    def violated_by(self, chosen: Iterable[Edge]) -> bool:
        return not self.satisfied_by(chosen)

    @property
    def key(self):
        return self.coeffs, self.sense, self.rhs


@dataclass
class Model:
    instance: Instance
    edges: tuple[Edge, ...]
    cuts: list[Cut] = field(default_factory=list)
    incumbent: frozenset[Edge] | None = None

    def __post_init__(self):
        self.index = {e: i for i, e in enumerate(self.edges)}
        self.cost = np.array([self.instance.cost(u, v) for u, v in self.edges], dtype=float)
        self._keys = {c.key for c in self.cuts}

    @property
    def n_vars(self) -> int:
        return len(self.edges)

    def add_cut(self, cut: Cut) -> bool:
        """Add to the pool; False if an identical cut is already there."""
        if cut.key in self._keys:
            return False
        self._keys.add(cut.key)
        self.cuts.append(cut)
        return True

    def objective(self, chosen: Iterable[Edge]) -> float:
        return self.instance.length(chosen)

    def rows(self):
        """(matrix, lower, upper) with degree rows first, then one row per
        cut.  Coefficients on pairs outside the model are dropped, which is
        exact because those variables are fixed at zero."""
        n = self.instance.n
        data, ri, ci, lo, hi = [], [], [], [], []
        for j, (u, v) in enumerate(self.edges):
            for w in (u, v):
                data.append(1.0)
                ri.append(w)
                ci.append(j)
        lo += [2.0] * n
        hi += [2.0] * n
        r = n
        for cut in self.cuts:
            for e, c in cut.coeffs:
                j = self.index.get(e)
                if j is not None:
                    data.append(float(c))
                    ri.append(r)
                    ci.append(j)
            if cut.sense == ">=":
                lo.append(float(cut.rhs))
                hi.append(math.inf)
            else:
                lo.append(-math.inf)
                hi.append(float(cut.rhs))
            r += 1
        a = csr_matrix((data, (ri, ci)), shape=(r, self.n_vars))
        return a, np.array(lo), np.array(hi)


def build_model(instance: Instance, edge_subset: Iterable[Edge] | None = None) -> Model:
    """Degree-2 model over `edge_subset` (default: all candidate edges).

    Pairs whose segment passes through a third point are rejected: no
    polygon can use them.
    """
    cand = set(instance.candidate_edges)
    if edge_subset is None:
        edges = sorted(cand)
    else:
        edges = sorted({ekey(*e) for e in edge_subset})
        bad = [e for e in edges if e not in cand]
        if bad:
            raise ValueError(f"edge {bad[0]} passes through another point")
    deg = [0] * instance.n
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    for v, d in enumerate(deg):
        if d < 2:
            raise UnsatisfiableDegreeError(v)
    return Model(instance, tuple(edges))


def subtour_cut_for(cycle: Sequence[int], n: int) -> Cut:
    """Cut for a cycle that can never be part of a polygon: the cycle form
    sum_{e in C} x_e <= |C| - 1 when |C| <= (2n + 1) / 3, otherwise the
    equivalent form sum_{e in delta(C)} x_e >= 2."""
    k = len(cycle)
    if 3 * k <= 2 * n + 1:
        return cycle_cut(cycle)
    inside = set(cycle)
    coeffs = {ekey(u, v): 1 for u in inside for v in range(n) if v not in inside}
    return Cut.of(coeffs, ">=", 2, CutKind.DSC)


def cycle_cut(cycle: Sequence[int], kind: CutKind = CutKind.SUBTOUR) -> Cut:
    k = len(cycle)
    coeffs = {ekey(cycle[i], cycle[(i + 1) % k]): 1 for i in range(k)}
    return Cut.of(coeffs, "<=", k - 1, kind)


# ---------------------------------------------------------------------------
# backends


class Status(enum.Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    TIME_LIMIT = "TIME_LIMIT"


@dataclass(frozen=True)
class IntegralResult:
    status: Status
    chosen: frozenset[Edge] | None
    objective: float | None
    nodes: int = 0


class Backend(Protocol):
    """Exact binary minimisation over the model's rows.  Must return
    OPTIMAL with a proven-optimal solution, INFEASIBLE, or TIME_LIMIT with
    the best solution found (possibly none)."""

    name: str

    def solve(self, model: Model, time_limit: float | None) -> IntegralResult: ...


def _chosen(model: Model, x: np.ndarray) -> frozenset[Edge]:
    return frozenset(model.edges[j] for j in np.flatnonzero(x > 0.5))


def _is_integral(x: np.ndarray) -> bool:
    return bool(np.all(np.minimum(np.abs(x), np.abs(1 - x)) <= INTEGRALITY_TOL))


def _with_incumbent_row(model: Model, a, lo, hi):
    # an incumbent gives the cutoff  c.x <= value; the relaxation optimum is
    # never above it, so the row only prunes
    if model.incumbent is None:
        return a, lo, hi
    ub = model.objective(model.incumbent)
    row = csr_matrix(model.cost.reshape(1, -1))
    return vstack([a, row]).tocsr(), np.append(lo, -np.inf), np.append(hi, ub * (1 + 1e-9) + 1e-9)


class HighsBackend:
    """HiGHS branch-and-cut through scipy.optimize.milp."""

    name = "highs"

    def __init__(self, rel_gap: float = 1e-10):
        self.rel_gap = rel_gap

    def solve(self, model: Model, time_limit: float | None) -> IntegralResult:
        a, lo, hi = _with_incumbent_row(model, *model.rows())
        options = {"mip_rel_gap": self.rel_gap, "presolve": True}
        if time_limit is not None:
            options["time_limit"] = max(float(time_limit), 1e-3)
        try:
            res = milp(model.cost, constraints=LinearConstraint(a, lo, hi),
                       integrality=np.ones(model.n_vars), bounds=Bounds(0, 1), options=options)
        except Exception as exc:  # scipy raises plain ValueError on bad input
            raise BackendFailure(str(exc)) from exc
        if res.status == 0:
            chosen = _chosen(model, res.x)
            return IntegralResult(Status.OPTIMAL, chosen, model.objective(chosen))
        if res.status == 2:
            return IntegralResult(Status.INFEASIBLE, None, None)
        if res.status == 1:
            if res.x is not None and _is_integral(res.x):
                chosen = _chosen(model, res.x)
                return IntegralResult(Status.TIME_LIMIT, chosen, model.objective(chosen))
            return IntegralResult(Status.TIME_LIMIT, None, None)
        raise BackendFailure(f"HiGHS status {res.status}: {res.message}")


class BranchAndBoundBackend:
    """Best-first branch and bound on the LP relaxation.

    Branches on the most fractional variable, ties by lowest index; each
    node's LP is solved by scipy's linprog.
    """

    name = "bnb"

    def solve(self, model: Model, time_limit: float | None) -> IntegralResult:
        start = time.monotonic()
        a, lo, hi = model.rows()
        eq = lo == hi
        a_eq, b_eq = a[eq], lo[eq]
        ub_rows, ub_rhs = [], []
        for r in np.flatnonzero(~eq):
            if np.isfinite(hi[r]):
                ub_rows.append(a[r])
                ub_rhs.append(hi[r])
            if np.isfinite(lo[r]):
                ub_rows.append(-a[r])
                ub_rhs.append(-lo[r])
        a_ub = vstack(ub_rows).tocsr() if ub_rows else None
        b_ub = np.array(ub_rhs) if ub_rows else None

        best_val = math.inf
        best: frozenset[Edge] | None = None
        if model.incumbent is not None:
            best = frozenset(model.incumbent)
            best_val = model.objective(best)
        nv = model.n_vars

        def relax(fixed: dict[int, int]):
            lb = np.zeros(nv)
            ub = np.ones(nv)
            for j, val in fixed.items():
                lb[j] = ub[j] = val
            r = linprog(model.cost, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                        bounds=np.column_stack([lb, ub]), method="highs")
            if r.status == 2:
                return None
            if r.status != 0:
                raise BackendFailure(f"LP status {r.status}: {r.message}")
            return r.fun, r.x

        def pruned(bound: float) -> bool:
            return best is not None and bound >= best_val - 1e-9 * max(1.0, abs(best_val))

        counter = 0
        heap: list = []
        root = relax({})
        nodes = 1
        if root is not None:
            heapq.heappush(heap, (root[0], counter, {}, root[1]))
        while heap:
            if time_limit is not None and time.monotonic() - start > time_limit:
                status = Status.TIME_LIMIT
                return IntegralResult(status, best, best_val if best is not None else None, nodes)
            bound, _, fixed, x = heapq.heappop(heap)
            if pruned(bound):
                continue
            frac = np.minimum(x, 1 - x)
            j = int(np.argmax(frac))  # argmax returns the lowest index among ties
            if frac[j] <= INTEGRALITY_TOL:
                chosen = _chosen(model, x)
                val = model.objective(chosen)
                if val < best_val:
                    best_val, best = val, chosen
                continue
            for val in (1, 0):
                child = dict(fixed)
                child[j] = val
                r = relax(child)
                nodes += 1
                if r is not None and not pruned(r[0]):
                    counter += 1
                    heapq.heappush(heap, (r[0], counter, child, r[1]))
        if best is None:
            return IntegralResult(Status.INFEASIBLE, None, None, nodes)
        return IntegralResult(Status.OPTIMAL, best, best_val, nodes)


class ExternalBackend:
    """Runs a third-party solver through LP files.

    `command` is a list of arguments in which "{lp}" and "{sol}" are
    replaced by the model and solution paths.  The solver must write one
    line per nonzero variable, "name value", and may start the file with a
    line "status OPTIMAL|INFEASIBLE|TIME_LIMIT".
    """

    name = "external"

    def __init__(self, command: Sequence[str]):
        self.command = list(command)

    def solve(self, model: Model, time_limit: float | None) -> IntegralResult:
        with tempfile.TemporaryDirectory() as d:
            lp = Path(d) / "model.lp"
            sol = Path(d) / "model.sol"
            lp.write_text(write_lp(model))
            args = [a.replace("{lp}", str(lp)).replace("{sol}", str(sol)) for a in self.command]
            try:
                subprocess.run(args, check=True, timeout=time_limit, capture_output=True)
            except subprocess.TimeoutExpired:
                return IntegralResult(Status.TIME_LIMIT, None, None)
            except (OSError, subprocess.CalledProcessError) as exc:
                raise BackendFailure(f"external solver failed: {exc}") from exc
            if not sol.exists():
                raise BackendFailure("external solver wrote no solution file")
            status, values = read_solution_values(sol.read_text())
        if status is Status.INFEASIBLE:
            return IntegralResult(status, None, None)
        chosen = frozenset(_parse_var(name) for name, val in values.items() if val > 0.5)
        return IntegralResult(status, chosen, model.objective(chosen))


def solve_integral(model: Model, backend: Backend | None = None, time_limit: float | None = None) -> IntegralResult:
    return (backend or HighsBackend()).solve(model, time_limit)


# ---------------------------------------------------------------------------
# LP text format


def _var(e: Edge) -> str:
    return f"x_{e[0]}_{e[1]}"


_VAR_RE = re.compile(r"x_(\d+)_(\d+)$")


def _parse_var(name: str) -> Edge:
    m = _VAR_RE.match(name)
    if not m:
        raise ParseError(f"unknown variable {name!r}")
    return ekey(int(m.group(1)), int(m.group(2)))


def _terms(pairs: Iterable[tuple[float | int, str]]) -> str:
    out = []
    for c, name in pairs:
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        coef = "" if mag == 1 and isinstance(mag, int) else f"{mag!r} "
        out.append(f"{sign} {coef}{name}")
    text = " ".join(out)
    return text[2:] if text.startswith("+ ") else text


def write_lp(model: Model) -> str:
    """CPLEX LP format.  Constraint names carry the cut family so that
    read_lp can rebuild the pool."""
    lines = [f"\\ {model.instance.name}", "Minimize"]
    obj = [(float(c), _var(e)) for e, c in zip(model.edges, model.cost)]
    lines.append(" obj: " + _terms(obj))
    lines.append("Subject To")
    by_vertex: dict[int, list[Edge]] = {v: [] for v in range(model.instance.n)}
    for e in model.edges:
        by_vertex[e[0]].append(e)
        by_vertex[e[1]].append(e)
    for v, es in by_vertex.items():
        lines.append(f" deg_{v}: " + _terms((1, _var(e)) for e in es) + " = 2")
    for i, cut in enumerate(model.cuts):
        # a cut with no variable in this model still constrains it
        terms = [(c, _var(e)) for e, c in cut.coeffs if e in model.index] or [(0, _var(model.edges[0]))]
        lines.append(f" {cut.kind.value}_{i}: " + _terms(terms) + f" {cut.sense} {cut.rhs}")
    lines.append("Bounds")
    lines += [f" 0 <= {_var(e)} <= 1" for e in model.edges]
    lines.append("Binaries")
    lines += [" " + _var(e) for e in model.edges]
    lines.append("End")
    return "\n".join(lines) + "\n"


_TERM_RE = re.compile(r"([+-])?\s*(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)?\s*(x_\d+_\d+)")


def _parse_terms(text: str, line: int) -> list[tuple[float, Edge]]:
    out = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TERM_RE.match(text, pos)
        if not m:
            raise ParseError(f"cannot parse expression {text[pos:]!r}", line)
        sign = -1.0 if m.group(1) == "-" else 1.0
        coef = float(m.group(2)) if m.group(2) else 1.0
        out.append((sign * coef, _parse_var(m.group(3))))
        pos = m.end()
        while pos < len(text) and text[pos] == " ":
            pos += 1
    return out


def read_lp(text: str, instance: Instance) -> Model:
    """Inverse of write_lp for models over `instance`."""
    section = None
    edges: list[Edge] = []
    cuts: list[Cut] = []
    kinds = {k.value: k for k in CutKind}
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        low = line.lower()
        if low in ("minimize", "subject to", "bounds", "binaries", "end"):
            section = low
            continue
        if section == "minimize":
            body = line.split(":", 1)[1]
            edges = [e for _, e in _parse_terms(body, ln)]
        elif section == "subject to":
            name, body = line.split(":", 1)
            m = re.match(r"(.*?)\s*(>=|<=|=)\s*(-?\d+)$", body.strip())
            if not m:
                raise ParseError(f"bad constraint {line!r}", ln)
            if name.startswith("deg_"):
                continue
            kind = kinds.get(name.rsplit("_", 1)[0])
            if kind is None:
                raise ParseError(f"unknown constraint family in {name!r}", ln)
            coeffs = [(e, int(c)) for c, e in _parse_terms(m.group(1), ln)]
            cuts.append(Cut.of(coeffs, m.group(2), int(m.group(3)), kind))
        elif section in ("bounds", "binaries"):
            continue
        else:
            raise ParseError(f"text outside any section: {line!r}", ln)
    if section != "end":
        raise ParseError("missing End")
    model = Model(instance, tuple(edges))
    for c in cuts:
        model.add_cut(c)
    return model


def read_solution_values(text: str) -> tuple[Status, dict[str, float]]:
    status = Status.OPTIMAL
    values: dict[str, float] = {}
    for ln, raw in enumerate(text.splitlines(), 1):
        parts = raw.split()
        if not parts:
            continue
        if parts[0] == "status":
            try:
                status = Status(parts[1])
            except (IndexError, ValueError):
                raise ParseError(f"bad status line {raw!r}", ln) from None
            continue
        if len(parts) != 2:
            raise ParseError(f"expected 'name value', got {raw!r}", ln)
        values[parts[0]] = float(parts[1])
    return status, values
