"""Problem instances: the immutable point set, TSPLIB and native text I/O,
sampling of instances from grayscale brightness maps, and the gadget
reduction from planar vertex cover.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (BadImageError, DegenerateError, EmptyDensityError, NonPlanarError, ParamsOutOfOrderError,
                     ParseError, TooFewPointsError, UnsupportedWeightTypeError)
from .geometry import (Metric, Point, convex_hull, edge_length, hull_boundary,
                       segments_properly_cross, strictly_inside_segment)

Edge = tuple[int, int]


@dataclass(frozen=True)
class Instance:
    """A named point set with a length metric.

    Point ids are reassigned to 0..n-1 in input order.  Derived data (hull,
    cost matrix, candidate edges) is computed lazily and cached.
    """

    name: str
    points: tuple[Point, ...]
    metric: Metric = Metric.EUCLID
    provenance: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        pts = tuple(Point(float(p[0]), float(p[1]), i) for i, p in enumerate(self.points))
        if len(pts) < 3:
            raise TooFewPointsError(f"an instance needs at least 3 points, got {len(pts)}")
        for p in pts:
            if not (math.isfinite(p.x) and math.isfinite(p.y)):
                raise DegenerateError(f"point {p.id} has a non-finite coordinate")
        if len({(p.x, p.y) for p in pts}) != len(pts):
            raise DegenerateError("duplicate coordinates")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "provenance", dict(self.provenance))

    @classmethod
    def from_coords(cls, coords: Iterable[Sequence[float]], name: str = "unnamed",
                    metric: Metric = Metric.EUCLID, **provenance) -> Instance:
        return cls(name, tuple(Point(c[0], c[1]) for c in coords), metric, provenance)

    @property
    def n(self) -> int:
        return len(self.points)

    def with_metric(self, metric: Metric) -> Instance:
        return Instance(self.name, self.points, metric, self.provenance)

    # -- geometry ----------------------------------------------------------

    @cached_property
    def hull(self) -> tuple[int, ...]:
        """Ids of all hull-boundary points in ccw order (collinear ones too)."""
        return tuple(p.id for p in hull_boundary(self.points))

    @cached_property
    def hull_corners(self) -> tuple[int, ...]:
        return tuple(p.id for p in convex_hull(self.points))

    @cached_property
    def interior(self) -> tuple[int, ...]:
        on_hull = set(self.hull)
        return tuple(i for i in range(self.n) if i not in on_hull)

    @cached_property
    def hull_perimeter(self) -> float:
        h = self.hull
        return sum(self.cost(h[i], h[(i + 1) % len(h)]) for i in range(len(h)))

    # -- costs -------------------------------------------------------------

    @cached_property
    def dist(self) -> np.ndarray:
        n = self.n
        if self.metric is Metric.EUCLID:
            xy = np.array([(p.x, p.y) for p in self.points])
            d = np.empty((n, n))
            # element-wise to stay bit-identical with edge_length
            for i in range(n):
                dx = xy[i, 0] - xy[:, 0]
                dy = xy[i, 1] - xy[:, 1]
                d[i] = np.sqrt(dx * dx + dy * dy)
            return d
        d = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                d[i, j] = d[j, i] = edge_length(self.metric, self.points[i], self.points[j])
        return d

    def cost(self, u: int, v: int) -> float:
        return float(self.dist[u, v])

    def length(self, edges: Iterable[Edge]) -> float:
        return math.fsum(self.cost(u, v) for u, v in edges)

    @cached_property
    def candidate_edges(self) -> tuple[Edge, ...]:
        """All vertex pairs whose open segment contains no other input point,
        sorted.  The position in this tuple is the edge's index."""
        pts = self.points
        frac = [(Fraction(p.x), Fraction(p.y)) for p in pts]
        keep = []
        for u in range(self.n):
            # nearest point per exact direction from u
            best: dict = {}
            ux, uy = frac[u]
            for v in range(self.n):
                if v == u:
                    continue
                dx, dy = frac[v][0] - ux, frac[v][1] - uy
                key = ("v", dy > 0) if dx == 0 else (dx > 0, dy / dx)
                d2 = dx * dx + dy * dy
                if key not in best or d2 < best[key][0]:
                    best[key] = (d2, v)
            keep.extend((u, v) for _, v in best.values() if u < v)
        return tuple(sorted(keep))

    @cached_property
    def edge_index(self) -> dict[Edge, int]:
        return {e: i for i, e in enumerate(self.candidate_edges)}



# ---------------------------------------------------------------------------
# TSPLIB

_TSPLIB_METRICS = {"EUC_2D": Metric.TSPLIB_EUC2D, "GEO": Metric.TSPLIB_GEO, "ATT": Metric.TSPLIB_ATT}
_TSPLIB_NAMES = {m: k for k, m in _TSPLIB_METRICS.items()}
_HEADER = re.compile(r"^\s*([A-Z_]+)\s*:\s*(.*?)\s*$")


def parse_tsplib(text: str, metric: Metric | None = None) -> Instance:
    """Parse a TSPLIB TSP file with node coordinates.

    `metric` overrides the metric implied by EDGE_WEIGHT_TYPE (typically to
    plain EUCLID); the weight type must still be one we understand.
    """
    header: dict[str, str] = {}
    coords: list[tuple[float, float]] = []
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        raw = lines[i].strip()
        i += 1
        if not raw:
            continue
        if raw == "EOF":
            break
        if raw.startswith("NODE_COORD_SECTION"):
            if "DIMENSION" not in header:
                raise ParseError("DIMENSION missing before NODE_COORD_SECTION", i)
            try:
                dim = int(header["DIMENSION"])
            except ValueError:
                raise ParseError(f"bad DIMENSION {header['DIMENSION']!r}", i) from None
            while len(coords) < dim:
                if i >= len(lines):
                    raise ParseError(f"expected {dim} coordinates, found {len(coords)}", i)
                parts = lines[i].split()
                i += 1
                if not parts:
                    continue
                if len(parts) != 3:
                    raise ParseError(f"bad coordinate line {lines[i - 1]!r}", i)
                try:
                    coords.append((float(parts[1]), float(parts[2])))
                except ValueError:
                    raise ParseError(f"bad coordinate line {lines[i - 1]!r}", i) from None
            continue
        if raw.endswith("_SECTION"):
            raise ParseError(f"unsupported section {raw}", i)
        m = _HEADER.match(raw)
        if not m:
            raise ParseError(f"unrecognized line {raw!r}", i)
        header[m.group(1)] = m.group(2)
    if "DIMENSION" not in header:
        raise ParseError("DIMENSION missing")
    if not coords:
        raise ParseError("NODE_COORD_SECTION missing")
    wtype = header.get("EDGE_WEIGHT_TYPE", "")
    if wtype not in _TSPLIB_METRICS:
        raise UnsupportedWeightTypeError(f"EDGE_WEIGHT_TYPE {wtype!r} is not supported")
    name = header.get("NAME", "unnamed").removesuffix(".tsp")
    return Instance(name, tuple(Point(x, y) for x, y in coords), metric or _TSPLIB_METRICS[wtype],
                    {"source": "tsplib", "edge_weight_type": wtype})


def read_tsplib(path, metric: Metric | None = None) -> Instance:
    with open(path) as fh:
        return parse_tsplib(fh.read(), metric)


def write_tsplib(inst: Instance) -> str:
    wtype = _TSPLIB_NAMES.get(inst.metric) or inst.provenance.get("edge_weight_type", "EUC_2D")
    out = [f"NAME : {inst.name}", "TYPE : TSP", f"DIMENSION : {inst.n}",
           f"EDGE_WEIGHT_TYPE : {wtype}", "NODE_COORD_SECTION"]
    out += [f"{p.id + 1} {p.x!r} {p.y!r}" for p in inst.points]
    out.append("EOF")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# native text format
#
#   mpp-instance 1
#   name <name>
#   metric <euclid|tsplib_euc2d|tsplib_geo|tsplib_att>
#   points <n>
#   <x> <y>            (n lines, repr floats, round-trip exact)
#
#   mpp-solution 1
#   instance <name>
#   objective <float>
#   edges <m>
#   <u> <v>            (m lines)
#   cycles <k>
#   <v0> <v1> ...      (k lines)


def write_instance(inst: Instance) -> str:
    out = ["mpp-instance 1", f"name {inst.name}", f"metric {inst.metric.value}", f"points {inst.n}"]
    out += [f"{p.x!r} {p.y!r}" for p in inst.points]
    return "\n".join(out) + "\n"


def _expect(lines: list[str], i: int, key: str) -> str:
    if i >= len(lines):
        raise ParseError(f"expected {key!r}, found end of file", i + 1)
    head, _, rest = lines[i].partition(" ")
    if head != key:
        raise ParseError(f"expected {key!r}, found {lines[i]!r}", i + 1)
    return rest.strip()


def _count(value: str, line: int) -> int:
    try:
        k = int(value)
    except ValueError:
        raise ParseError(f"bad count {value!r}", line) from None
    if k < 0:
        raise ParseError(f"negative count {k}", line)
    return k


def parse_instance(text: str) -> Instance:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or lines[0] != "mpp-instance 1":
        raise ParseError("missing 'mpp-instance 1' header", 1)
    name = _expect(lines, 1, "name")
    try:
        metric = Metric(_expect(lines, 2, "metric"))
    except ValueError:
        raise ParseError(f"unknown metric in {lines[2]!r}", 3) from None
    n = _count(_expect(lines, 3, "points"), 4)
    pts = []
    for k in range(n):
        if 4 + k >= len(lines):
            raise ParseError(f"expected {n} points, found {k}", 4 + k + 1)
        parts = lines[4 + k].split()
        try:
            x, y = (float(v) for v in parts)
        except ValueError:
            raise ParseError(f"bad point line {lines[4 + k]!r}", 4 + k + 1) from None
        pts.append(Point(x, y))
    return Instance(name, tuple(pts), metric, {"source": "native"})


def read_instance(path) -> Instance:
    """Read a native instance, or a TSPLIB file if it does not start with
    the native header."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("mpp-instance"):
        return parse_instance(text)
    return parse_tsplib(text)


@dataclass(frozen=True)
class SolutionRecord:
    instance_name: str
    objective: float
    edges: tuple[Edge, ...]
    cycles: tuple[tuple[int, ...], ...]


def write_solution(name: str, objective: float, edges: Iterable[Edge],
                   cycles: Iterable[Sequence[int]]) -> str:
    edges = sorted((min(e), max(e)) for e in edges)
    cycles = [tuple(c) for c in cycles]
    out = ["mpp-solution 1", f"instance {name}", f"objective {objective!r}", f"edges {len(edges)}"]
    out += [f"{u} {v}" for u, v in edges]
    out.append(f"cycles {len(cycles)}")
    out += [" ".join(map(str, c)) for c in cycles]
    return "\n".join(out) + "\n"


def parse_solution(text: str) -> SolutionRecord:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or lines[0] != "mpp-solution 1":
        raise ParseError("missing 'mpp-solution 1' header", 1)
    name = _expect(lines, 1, "instance")
    try:
        objective = float(_expect(lines, 2, "objective"))
    except ValueError:
        raise ParseError(f"bad objective in {lines[2]!r}", 3) from None
    m = _count(_expect(lines, 3, "edges"), 4)
    try:
        edges = tuple(tuple(int(v) for v in lines[4 + k].split()) for k in range(m))
    except (ValueError, IndexError):
        raise ParseError("bad edge list", 5) from None
    if any(len(e) != 2 for e in edges):
        raise ParseError("edge lines need exactly two vertex ids", 5)
    at = 4 + m
    k = _count(_expect(lines, at, "cycles"), at + 1)
    try:
        cycles = tuple(tuple(int(v) for v in lines[at + 1 + j].split()) for j in range(k))
    except (ValueError, IndexError):
        raise ParseError("bad cycle list", at + 2) from None
    return SolutionRecord(name, objective, edges, cycles)


# ---------------------------------------------------------------------------
# generators


def uniform_instance(n: int, seed: int, size: float = 1000.0, name: str | None = None) -> Instance:
    if n < 3:
        raise TooFewPointsError(f"n must be at least 3, got {n}")
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0.0, size, size=(n, 2))
    return Instance.from_coords(xy.tolist(), name or f"uniform-{n}-{seed}", generator="uniform", seed=seed)


def read_pgm(data: bytes) -> np.ndarray:
    """Decode a P2 or P5 graymap into a (rows, cols) array of intensities."""
    tokens: list[bytes] = []
    pos = 0
    # header: magic, width, height, maxval, with '#' comments
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise BadImageError("truncated PGM header")
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    magic = tokens[0]
    if magic not in (b"P2", b"P5"):
        raise BadImageError(f"not a PGM file (magic {magic!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise BadImageError("bad PGM header") from None
    if width <= 0 or height <= 0 or not 0 < maxval < 65536:
        raise BadImageError("bad PGM dimensions")
    count = width * height
    if magic == b"P5":
        pos += 1  # single whitespace after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        raw = data[pos:pos + count * dtype.itemsize]
        if len(raw) < count * dtype.itemsize:
            raise BadImageError("truncated PGM raster")
        pix = np.frombuffer(raw, dtype=dtype).astype(np.int64)
    else:
        body = re.sub(rb"#[^\n]*", b"", data[pos:]).split()
        if len(body) < count:
            raise BadImageError("truncated PGM raster")
        try:
            pix = np.array([int(t) for t in body[:count]], dtype=np.int64)
        except ValueError:
            raise BadImageError("non-numeric PGM raster") from None
    if pix.max(initial=0) > maxval:
        raise BadImageError("pixel exceeds maxval")
    return pix.reshape(height, width)


def generate_from_brightness(pgm_bytes: bytes, n: int, threshold: float, seed: int,
                             name: str | None = None) -> Instance:
    """Sample n points with probability proportional to pixel brightness.

    Pixels darker than `threshold` get zero weight.  Each sample lands
    uniformly inside its pixel; image row 0 is the top, so y is flipped to
    keep the picture upright.
    """
    if n < 3:
        raise TooFewPointsError(f"n must be at least 3, got {n}")
    img = read_pgm(pgm_bytes)
    weights = np.where(img >= threshold, img, 0).astype(float).ravel()
    total = weights.sum()
    if total <= 0:
        raise EmptyDensityError("no pixel reaches the brightness threshold")
    rng = np.random.default_rng(seed)
    h, w = img.shape
    idx = rng.choice(weights.size, size=n, p=weights / total)
    jitter = rng.random((n, 2))
    rows, cols = np.divmod(idx, w)
    xs = cols + jitter[:, 0]
    ys = (h - 1 - rows) + jitter[:, 1]
    return Instance.from_coords(list(zip(xs.tolist(), ys.tolist())), name or f"brightness-{n}-{seed}",
                                generator="brightness", seed=seed, threshold=threshold)


# ---------------------------------------------------------------------------
# planar vertex cover -> MPP
#
# Graph text format:
#   mpp-graph 1
#   vertices <n>
#   <x> <y>            (n lines)
#   edges <m>
#   <u> <v>            (m lines)


@dataclass(frozen=True)
class PlanarGraph:
    """A straight-line embedding: vertex positions and undirected edges."""

    points: tuple[tuple[float, float], ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.points)
        edges = tuple(sorted({(min(u, v), max(u, v)) for u, v in self.edges}))
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "edges", edges)
        n = len(pts)
        for u, v in edges:
            if u == v or not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"bad edge ({u}, {v})")
        if len(set(pts)) != n:
            raise NonPlanarError("two vertices share a position")

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> list[int]:
        return [b if a == v else a for a, b in self.edges if v in (a, b)]

    def degree(self, v: int) -> int:
        return sum(v in e for e in self.edges)

    def check_planar(self) -> None:
        pts = self.points
        for i, (a, b) in enumerate(self.edges):
            for c, d in self.edges[i + 1:]:
                if segments_properly_cross((pts[a], pts[b]), (pts[c], pts[d])):
                    raise NonPlanarError(f"edges ({a}, {b}) and ({c}, {d}) cross")
            for v in range(self.n):
                if strictly_inside_segment(pts[v], pts[a], pts[b]):
                    raise NonPlanarError(f"edge ({a}, {b}) passes through vertex {v}")

    def faces(self) -> list[list[int]]:
        """Face boundaries as vertex walks; bounded faces are counterclockwise
        and the outer face comes last."""
        pts = self.points
        order = {}
        for v in range(self.n):
            nb = self.neighbors(v)
            nb.sort(key=lambda w: math.atan2(pts[w][1] - pts[v][1], pts[w][0] - pts[v][0]))
            order[v] = nb
        seen = set()
        faces = []
        for u, v in self.edges:
            for start in ((u, v), (v, u)):
                if start in seen:
                    continue
                walk = []
                a, b = start
                while (a, b) not in seen:
                    seen.add((a, b))
                    walk.append(a)
                    nb = order[b]
                    # turn to the neighbour just clockwise of a around b
                    a, b = b, nb[(nb.index(a) - 1) % len(nb)]
                faces.append(walk)
        faces.sort(key=lambda f: -_walk_area(pts, f))
        return faces

    def min_vertex_cover(self) -> int:
        """Brute force; small graphs only."""
        for k in range(self.n + 1):
            for mask in range(1 << self.n):
                if bin(mask).count("1") == k and all(mask >> u & 1 or mask >> v & 1 for u, v in self.edges):
                    return k
        return self.n


def _walk_area(pts, walk) -> float:
    s = 0.0
    for i, a in enumerate(walk):
        b = walk[(i + 1) % len(walk)]
        s += pts[a][0] * pts[b][1] - pts[b][0] * pts[a][1]
    return s / 2.0


def parse_graph(text: str) -> PlanarGraph:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or lines[0] != "mpp-graph 1":
        raise ParseError("missing 'mpp-graph 1' header", 1)
    n = _count(_expect(lines, 1, "vertices"), 2)
    pts = []
    for k in range(n):
        i = 2 + k
        try:
            x, y = (float(v) for v in lines[i].split())
        except (IndexError, ValueError):
            raise ParseError("bad vertex line", i + 1) from None
        pts.append((x, y))
    m = _count(_expect(lines, 2 + n, "edges"), 3 + n)
    edges = []
    for k in range(m):
        i = 3 + n + k
        try:
            u, v = (int(t) for t in lines[i].split())
        except (IndexError, ValueError):
            raise ParseError("bad edge line", i + 1) from None
        edges.append((u, v))
    try:
        return PlanarGraph(tuple(pts), tuple(edges))
    except ValueError as exc:
        raise ParseError(str(exc), 3 + n) from None


def write_graph(g: PlanarGraph) -> str:
    out = ["mpp-graph 1", f"vertices {g.n}"] + [f"{x!r} {y!r}" for x, y in g.points]
    out += [f"edges {g.m}"] + [f"{u} {v}" for u, v in g.edges]
    return "\n".join(out) + "\n"


def read_graph(path) -> PlanarGraph:
    with open(path) as fh:
        return parse_graph(fh.read())


@dataclass(frozen=True)
class GadgetParams:
    """Gadget lengths.  `d` is the shortest graph edge after scaling and `T`
    the perimeter of the enclosing triangle; `T = None` picks 100x the
    scaled diameter."""

    a: float = 1e4
    b: float = 100.0
    eps: float = 1.0
    d: float = 1e6
    T: float | None = None

    def __post_init__(self):
        if not 0 < self.eps <= self.b / 100 <= self.a / 1e4 <= self.d / 1e6:
            raise ParamsOutOfOrderError(
                f"need 0 < eps <= b/100 <= a/1e4 <= d/1e6, got eps={self.eps}, b={self.b}, a={self.a}, d={self.d}")

    @property
    def h(self) -> float:
        """Half the long diagonal of a rhombus with side a and short diagonal eps."""
        return math.sqrt(self.a * self.a - self.eps * self.eps / 4)


def reduction_threshold(params: GadgetParams, n: int, m: int, r: int, k: int, T: float) -> float:
    a, b, e = params.a, params.b, params.eps
    return (2 * b - e) * k + T + 2 * (16 * m - 8 * n + r) * a + (22 * m - 8 * n + r + 1) * e


@dataclass(frozen=True)
class Reduction:
    instance: Instance
    threshold: float
    k: int
    params: GadgetParams
    T: float
    rhombi: int                       # r, summed over edge gadgets
    groups: Mapping[str, tuple[int, ...]] = field(repr=False)
    schematic_error: float = 0.0      # actual minus nominal rhombus cost, summed

    def counts(self) -> dict[str, int]:
        c: dict[str, int] = {}
        for key in self.groups:
            kind = key.split(":")[0]
            c[kind] = c.get(kind, 0) + 1
        return c

    def threshold_for(self, k: int) -> float:
        g = self.instance.provenance
        return reduction_threshold(self.params, g["graph_n"], g["graph_m"], self.rhombi, k, self.T)


class _Layout:
    def __init__(self):
        self.coords: list[tuple[float, float]] = []
        self.groups: dict[str, list[int]] = {}
        self.skeleton: list[tuple[np.ndarray, np.ndarray]] = []

    def add(self, group: str, p) -> int:
        self.coords.append((float(p[0]), float(p[1])))
        self.groups.setdefault(group, []).append(len(self.coords) - 1)
        return len(self.coords) - 1


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def _perp(v) -> np.ndarray:
    return np.array([-v[1], v[0]])


def _chain(lay: _Layout, group: str, A, B, r: int, eps: float) -> None:
    """r rhombi from tip A to tip B; the end tips are not added."""
    A, B = np.asarray(A, float), np.asarray(B, float)
    n = _perp(_unit(B - A))
    for i in range(r):
        mid = A + (B - A) * (i + 0.5) / r
        lay.add(group, mid + n * eps / 2)
        lay.add(group, mid - n * eps / 2)
        if i > 0:
            lay.add(group, A + (B - A) * i / r)
    lay.skeleton.append((A, B))


def _triangle(lay: _Layout, group: str, center, side: float, up) -> None:
    up = _unit(up)
    across = _perp(up)
    h = side * math.sqrt(3) / 2
    base = np.asarray(center, float) - up * h / 3
    lay.add(group, base + across * side / 2)
    lay.add(group, base - across * side / 2)
    lay.add(group, base + up * h)


def reduce_vertex_cover(graph: PlanarGraph, k: int, params: GadgetParams = GadgetParams(),
                        name: str | None = None) -> Reduction:
    """MPP instance whose optimum is at most the returned threshold iff the
    graph has a vertex cover of size at most k.

    Layout: the graph is scaled so its shortest edge has length about d.
    Each vertex v gets its point p, an eps-triangle at distance b from p
    on the side away from its edges, and deg(v) - 1 split gadgets, each two
    chains of four rhombi plus an eps-triangle.  Split outputs are joined
    by straight rhombus chains.  The scale is tuned so the shortest chain
    is an exact multiple of the rhombus length.
    """
    graph.check_planar()
    if k < 0:
        raise ValueError("k must be non-negative")
    if graph.m == 0 or any(graph.degree(v) == 0 for v in range(graph.n)):
        raise ValueError("every vertex needs at least one edge")
    P = np.array(graph.points, dtype=float)
    lengths = [float(np.linalg.norm(P[u] - P[v])) for u, v in graph.edges]
    step = 2 * params.h

    # split tree per vertex: junction geometry does not depend on the scale
    offsets: dict[int, dict] = {}
    for v in range(graph.n):
        nbrs = graph.neighbors(v)
        dirs = [_unit(P[w] - P[v]) for w in nbrs]
        s = np.sum(dirs, axis=0)
        out = -_unit(s) if np.linalg.norm(s) > 1e-9 else _perp(dirs[0])
        splits = []                                   # (input, out1, out2) offsets from p
        leaves = [np.zeros(2)]
        if len(nbrs) >= 2:
            t = _perp(out)
            leaves = [4 * step * t, -4 * step * t]
            splits.append((np.zeros(2), leaves[0], leaves[1]))
            while len(leaves) < len(nbrs):
                src = leaves.pop(0)
                fwd = _unit(src)
                o1, o2 = src + 4 * step * fwd, src - 4 * step * out
                splits.append((src, o1, o2))
                leaves += [o1, o2]
        # match outputs to edges by direction
        best = (-math.inf, tuple(range(len(nbrs))))
        if len(nbrs) >= 2:
            for perm in itertools.permutations(range(len(nbrs))):
                score = sum(float(np.dot(_unit(leaves[i]), dirs[j])) for j, i in enumerate(perm))
                if score > best[0]:
                    best = (score, perm)
        offsets[v] = {"out": out, "splits": splits,
                      "port": {nbrs[j]: leaves[i] for j, i in enumerate(best[1])}}

    def span(lam: float, u: int, v: int) -> float:
        return float(np.linalg.norm(lam * (P[v] - P[u]) + offsets[v]["port"][u] - offsets[u]["port"][v]))

    lam = params.d / min(lengths)
    u0, v0 = graph.edges[int(np.argmin(lengths))]
    target = math.ceil(span(lam, u0, v0) / step) * step
    lo, hi = lam, lam * 2
    while span(hi, u0, v0) < target:
        hi *= 2
    for _ in range(200):
        mid = (lo + hi) / 2
        if span(mid, u0, v0) < target:
            lo = mid
        else:
            hi = mid
    lam = (lo + hi) / 2
    Q = P * lam

    lay = _Layout()
    eps, a = params.eps, params.a
    error = 0.0
    r_total = 0
    for v in range(graph.n):
        info = offsets[v]
        p = Q[v]
        lay.add(f"vertex:{v}", p)
        out = info["out"]
        across = _perp(out)
        base = p + out * math.sqrt(params.b ** 2 - eps ** 2 / 4)
        lay.add(f"vertex:{v}", base + across * eps / 2)
        lay.add(f"vertex:{v}", base - across * eps / 2)
        lay.add(f"vertex:{v}", base + out * eps * math.sqrt(3) / 2)
        for j, (src, o1, o2) in enumerate(info["splits"]):
            g = f"split:{v}.{j}"
            _chain(lay, g, p + src, p + o1, 4, eps)
            _chain(lay, g, p + src, p + o2, 4, eps)
            lay.add(g, p + o1)
            lay.add(g, p + o2)
            bisector = (o1 - src) + (o2 - src)
            away = -_unit(bisector) if np.linalg.norm(bisector) > 1e-9 else -out
            _triangle(lay, g, p + src + away * step, eps, away)
    for u, v in graph.edges:
        A = Q[u] + offsets[u]["port"][v]
        B = Q[v] + offsets[v]["port"][u]
        length = float(np.linalg.norm(B - A))
        r = max(1, round(length / step))
        r_total += r
        _chain(lay, f"edge:{u}-{v}", A, B, r, eps)
        half = length / (2 * r)
        error += r * 2 * (math.sqrt(half * half + eps * eps / 4) - a)

    # hole triplets: bounded faces at vertex barycenters, one outside the graph
    faces = graph.faces()
    side = eps / 10
    for i, f in enumerate(faces[:-1] if len(faces) > 1 else []):
        if _walk_area(graph.points, f) > 0:
            _triangle(lay, f"face:{i}", Q[f].mean(axis=0), side, (0.0, 1.0))
    lo_pt = np.min(np.array(lay.coords), axis=0)
    hi_pt = np.max(np.array(lay.coords), axis=0)
    _triangle(lay, "face:outer", ((lo_pt[0] + hi_pt[0]) / 2, lo_pt[1] - params.d / 2), side, (0.0, 1.0))

    _check_layout(lay)

    coords = np.array(lay.coords)
    center = (coords.min(axis=0) + coords.max(axis=0)) / 2
    diam = float(np.linalg.norm(coords.max(axis=0) - coords.min(axis=0)))
    T = params.T if params.T is not None else 100 * diam
    if T < 100 * diam:
        raise ParamsOutOfOrderError(f"T={T} must be at least 100x the layout diameter {diam}")
    R = T / (3 * math.sqrt(3))                       # circumradius of an equilateral triangle
    for j in range(3):
        ang = math.pi / 2 + 2 * math.pi * j / 3
        lay.add("outer", center + R * np.array([math.cos(ang), math.sin(ang)]))

    inst = Instance.from_coords(lay.coords, name or f"vc-reduction-n{graph.n}-m{graph.m}-k{k}",
                                generator="vertex-cover", graph_n=graph.n, graph_m=graph.m, k=k,
                                a=params.a, b=params.b, eps=params.eps, d=params.d, T=T)
    groups = {key: tuple(v) for key, v in lay.groups.items()}
    return Reduction(inst, reduction_threshold(params, graph.n, graph.m, r_total, k, T), k, params, T,
                     r_total, groups, error)


def _check_layout(lay: _Layout) -> None:
    segs = lay.skeleton
    for i, (a, b) in enumerate(segs):
        for c, d in segs[i + 1:]:
            if segments_properly_cross((tuple(a), tuple(b)), (tuple(c), tuple(d))):
                raise NonPlanarError("gadget layout overlaps itself; try a different embedding")
