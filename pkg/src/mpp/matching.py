"""Minimum-weight perfect matching and minimum-weight 2-factors.

The matching core is the primal-dual blossom method in the O(n^3) form of
Galil, with the data layout of Van Rantwijk's reference implementation
(edge endpoints numbered 2k and 2k+1, labels on top-level blossoms, lazy
best-edge lists).  All arithmetic is on integers: float weights are scaled
by a power of two that makes every one of them integral, so the duals
returned are an exact optimality certificate.

The 2-factor is a degree-2 b-matching.  It is reduced to perfect matching
by splitting every vertex into two copies and routing every edge uv
through two private nodes g_u, g_v::

    u1, u2 -- g_u -- g_v -- v1, v2

Matching g_u with g_v means "uv unused"; matching both to copies means
"uv used".  Each edge can be used at most once, so 2-cycles are
impossible.  Only a sparse edge set is expanded; missing edges are priced
with the matching duals and added until none has negative reduced cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import NoPerfectMatchingError, TooFewPointsError

Edge = tuple[int, int]


@dataclass(frozen=True)
class WeightedGraph:
    n: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        seen = set()
        for u, v, w in self.edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) out of range")
            if w < 0:
                raise ValueError(f"negative weight on ({u}, {v})")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"parallel edge {key}")
            seen.add(key)
        object.__setattr__(self, "edges", tuple(self.edges))


@dataclass(frozen=True)
class Blossom:
    vertices: frozenset[int]
    dual: Fraction


@dataclass(frozen=True)
class MatchingResult:
    """A perfect matching with its LP dual in minimisation form.

    Dual feasibility:  pi[u] + pi[v] - sum(z_B : u, v in B) <= w(uv),
    z_B >= 0;  optimality:  weight == sum(pi) - sum(z_B * (|B| - 1) / 2).
    """

    mate: tuple[int, ...]
    weight: float
    pi: tuple[Fraction, ...]
    blossoms: tuple[Blossom, ...]

    @property
    def edges(self) -> frozenset[Edge]:
        return frozenset((v, m) for v, m in enumerate(self.mate) if v < m)

    @property
    def dual_objective(self) -> Fraction:
        return sum(self.pi, Fraction(0)) - sum((b.dual * ((len(b.vertices) - 1) // 2) for b in self.blossoms),
                                               Fraction(0))


# ---------------------------------------------------------------------------
# blossom core (maximisation, integer weights)


def _max_weight_matching(nvertex: int, edges: Sequence[tuple[int, int, int]], maxcardinality: bool):
    """Return (mate, dualvar, blossom leaves) for a maximum-weight matching.

    mate[v] is v's partner or -1.  dualvar[v] is twice the vertex dual;
    dualvar[b] for b >= nvertex is the dual of blossom b, whose leaves are
    given in the third result.  Edge slack is
    dualvar[i] + dualvar[j] - 2 w + 2 * sum(z of blossoms holding both).
    """
    nedge = len(edges)
    if nedge == 0:
        return [-1] * nvertex, [0] * nvertex, {}
    maxweight = max(0, max(w for _, _, w in edges))
    endpoint = [edges[p // 2][p % 2] for p in range(2 * nedge)]
    neighbend: list[list[int]] = [[] for _ in range(nvertex)]
    for k, (i, j, _) in enumerate(edges):
        neighbend[i].append(2 * k + 1)
        neighbend[j].append(2 * k)

    mate = [-1] * nvertex
    # label: 0 free, 1 S (outer), 2 T (inner); bit 4 marks scanBlossom visits
    label = [0] * (2 * nvertex)
    labelend = [-1] * (2 * nvertex)
    inblossom = list(range(nvertex))
    blossomparent = [-1] * (2 * nvertex)
    blossomchilds: list = [None] * (2 * nvertex)
    blossombase = list(range(nvertex)) + [-1] * nvertex
    blossomendps: list = [None] * (2 * nvertex)
    bestedge = [-1] * (2 * nvertex)
    blossombestedges: list = [None] * (2 * nvertex)
    unusedblossoms = list(range(nvertex, 2 * nvertex))
    dualvar = [maxweight] * nvertex + [0] * nvertex
    allowedge = [False] * nedge
    queue: list[int] = []

    def slack(k):
        i, j, wt = edges[k]
        return dualvar[i] + dualvar[j] - 2 * wt

    def leaves(b):
        if b < nvertex:
            yield b
        else:
            for t in blossomchilds[b]:
                if t < nvertex:
                    yield t
                else:
                    yield from leaves(t)

    def assign_label(w, t, p):
        b = inblossom[w]
        label[w] = label[b] = t
        labelend[w] = labelend[b] = p
        bestedge[w] = bestedge[b] = -1
        if t == 1:
            queue.extend(leaves(b))
        else:
            base = blossombase[b]
            assign_label(endpoint[mate[base]], 1, mate[base] ^ 1)

    def scan_blossom(v, w):
        # trace back from v and w to find a common base or an augmenting path
        path = []
        base = -1
        while v != -1 or w != -1:
            b = inblossom[v]
            if label[b] & 4:
                base = blossombase[b]
                break
            path.append(b)
            label[b] = 5
            if labelend[b] == -1:
                v = -1
            else:
                v = endpoint[labelend[b]]
                b = inblossom[v]
                v = endpoint[labelend[b]]
            if w != -1:
                v, w = w, v
        for b in path:
            label[b] = 1
        return base

    def add_blossom(base, k):
        v, w, _ = edges[k]
        bb = inblossom[base]
        bv = inblossom[v]
        bw = inblossom[w]
        b = unusedblossoms.pop()
        blossombase[b] = base
        blossomparent[b] = -1
        blossomparent[bb] = b
        blossomchilds[b] = path = []
        blossomendps[b] = endps = []
        while bv != bb:
            blossomparent[bv] = b
            path.append(bv)
            endps.append(labelend[bv])
            v = endpoint[labelend[bv]]
            bv = inblossom[v]
        path.append(bb)
        path.reverse()
        endps.reverse()
        endps.append(2 * k)
        while bw != bb:
            blossomparent[bw] = b
            path.append(bw)
            endps.append(labelend[bw] ^ 1)
            w = endpoint[labelend[bw]]
            bw = inblossom[w]
        label[b] = 1
        labelend[b] = labelend[bb]
        dualvar[b] = 0
        for v in leaves(b):
            if label[inblossom[v]] == 2:
                queue.append(v)
            inblossom[v] = b
        bestedgeto = [-1] * (2 * nvertex)
        for bv in path:
            if blossombestedges[bv] is None:
                nblists = [[p // 2 for p in neighbend[v]] for v in leaves(bv)]
            else:
                nblists = [blossombestedges[bv]]
            for nblist in nblists:
                for k in nblist:
                    i, j, _ = edges[k]
                    if inblossom[j] == b:
                        i, j = j, i
                    bj = inblossom[j]
                    if bj != b and label[bj] == 1 and (bestedgeto[bj] == -1 or slack(k) < slack(bestedgeto[bj])):
                        bestedgeto[bj] = k
            blossombestedges[bv] = None
            bestedge[bv] = -1
        blossombestedges[b] = [k for k in bestedgeto if k != -1]
        bestedge[b] = -1
        for k in blossombestedges[b]:
            if bestedge[b] == -1 or slack(k) < slack(bestedge[b]):
                bestedge[b] = k

    def expand_blossom(b, endstage):
        for s in blossomchilds[b]:
            blossomparent[s] = -1
            if s < nvertex:
                inblossom[s] = s
            elif endstage and dualvar[s] == 0:
                expand_blossom(s, endstage)
            else:
                for v in leaves(s):
                    inblossom[v] = s
        if not endstage and label[b] == 2:
            # relabel the even-length path from the entry child to the base
            entrychild = inblossom[endpoint[labelend[b] ^ 1]]
            j = blossomchilds[b].index(entrychild)
            if j & 1:
                j -= len(blossomchilds[b])
                jstep, endptrick = 1, 0
            else:
                jstep, endptrick = -1, 1
            p = labelend[b]
            while j != 0:
                label[endpoint[p ^ 1]] = 0
                label[endpoint[blossomendps[b][j - endptrick] ^ endptrick ^ 1]] = 0
                assign_label(endpoint[p ^ 1], 2, p)
                allowedge[blossomendps[b][j - endptrick] // 2] = True
                j += jstep
                p = blossomendps[b][j - endptrick] ^ endptrick
                allowedge[p // 2] = True
                j += jstep
            bv = blossomchilds[b][j]
            label[endpoint[p ^ 1]] = label[bv] = 2
            labelend[endpoint[p ^ 1]] = labelend[bv] = p
            bestedge[bv] = -1
            j += jstep
            while blossomchilds[b][j] != entrychild:
                bv = blossomchilds[b][j]
                if label[bv] == 1:
                    j += jstep
                    continue
                for v in leaves(bv):
                    if label[v] != 0:
                        break
                if label[v] != 0:
                    label[v] = 0
                    label[endpoint[mate[blossombase[bv]]]] = 0
                    assign_label(v, 2, labelend[v])
                j += jstep
        label[b] = labelend[b] = -1
        blossomchilds[b] = blossomendps[b] = None
        blossombase[b] = -1
        blossombestedges[b] = None
        bestedge[b] = -1
        unusedblossoms.append(b)

    def augment_blossom(b, v):
        t = v
        while blossomparent[t] != b:
            t = blossomparent[t]
        if t >= nvertex:
            augment_blossom(t, v)
        i = j = blossomchilds[b].index(t)
        if i & 1:
            j -= len(blossomchilds[b])
            jstep, endptrick = 1, 0
        else:
            jstep, endptrick = -1, 1
        while j != 0:
            j += jstep
            t = blossomchilds[b][j]
            p = blossomendps[b][j - endptrick] ^ endptrick
            if t >= nvertex:
                augment_blossom(t, endpoint[p])
            j += jstep
            t = blossomchilds[b][j]
            if t >= nvertex:
                augment_blossom(t, endpoint[p ^ 1])
            mate[endpoint[p]] = p ^ 1
            mate[endpoint[p ^ 1]] = p
        blossomchilds[b] = blossomchilds[b][i:] + blossomchilds[b][:i]
        blossomendps[b] = blossomendps[b][i:] + blossomendps[b][:i]
        blossombase[b] = blossombase[blossomchilds[b][0]]

    def augment_matching(k):
        v, w, _ = edges[k]
        for s, p in ((v, 2 * k + 1), (w, 2 * k)):
            while True:
                bs = inblossom[s]
                if bs >= nvertex:
                    augment_blossom(bs, s)
                mate[s] = p
                if labelend[bs] == -1:
                    break
                t = endpoint[labelend[bs]]
                bt = inblossom[t]
                s = endpoint[labelend[bt]]
                j = endpoint[labelend[bt] ^ 1]
                if bt >= nvertex:
                    augment_blossom(bt, j)
                mate[j] = labelend[bt]
                p = labelend[bt] ^ 1

    for _ in range(nvertex):
        # one stage: grow alternating trees until an augmenting path appears
        label[:] = [0] * (2 * nvertex)
        bestedge[:] = [-1] * (2 * nvertex)
        blossombestedges[nvertex:] = [None] * nvertex
        allowedge[:] = [False] * nedge
        queue[:] = []
        for v in range(nvertex):
            if mate[v] == -1 and label[inblossom[v]] == 0:
                assign_label(v, 1, -1)
        augmented = False
        while True:
            while queue and not augmented:
                v = queue.pop()
                for p in neighbend[v]:
                    k = p // 2
                    w = endpoint[p]
                    if inblossom[v] == inblossom[w]:
                        continue
                    if not allowedge[k]:
                        kslack = slack(k)
                        if kslack <= 0:
                            allowedge[k] = True
                    if allowedge[k]:
                        if label[inblossom[w]] == 0:
                            assign_label(w, 2, p ^ 1)
                        elif label[inblossom[w]] == 1:
                            base = scan_blossom(v, w)
                            if base >= 0:
                                add_blossom(base, k)
                            else:
                                augment_matching(k)
                                augmented = True
                                break
                        elif label[w] == 0:
                            label[w] = 2
                            labelend[w] = p ^ 1
                    elif label[inblossom[w]] == 1:
                        b = inblossom[v]
                        if bestedge[b] == -1 or kslack < slack(bestedge[b]):
                            bestedge[b] = k
                    elif label[w] == 0:
                        if bestedge[w] == -1 or kslack < slack(bestedge[w]):
                            bestedge[w] = k
            if augmented:
                break
            # dual adjustment
            deltatype = -1
            delta = deltaedge = deltablossom = None
            if not maxcardinality:
                deltatype = 1
                delta = min(dualvar[:nvertex])
            for v in range(nvertex):
                if label[inblossom[v]] == 0 and bestedge[v] != -1:
                    d = slack(bestedge[v])
                    if deltatype == -1 or d < delta:
                        delta, deltatype, deltaedge = d, 2, bestedge[v]
            for b in range(2 * nvertex):
                if blossomparent[b] == -1 and label[b] == 1 and bestedge[b] != -1:
                    kslack = slack(bestedge[b])
                    d = kslack // 2 if kslack % 2 == 0 else Fraction(kslack, 2)
                    if deltatype == -1 or d < delta:
                        delta, deltatype, deltaedge = d, 3, bestedge[b]
            for b in range(nvertex, 2 * nvertex):
                if (blossombase[b] >= 0 and blossomparent[b] == -1 and label[b] == 2
                        and (deltatype == -1 or dualvar[b] < delta)):
                    delta, deltatype, deltablossom = dualvar[b], 4, b
            if deltatype == -1:
                # no further progress possible: maximum cardinality reached
                deltatype = 1
                delta = max(0, min(dualvar[:nvertex]))
            for v in range(nvertex):
                if label[inblossom[v]] == 1:
                    dualvar[v] -= delta
                elif label[inblossom[v]] == 2:
                    dualvar[v] += delta
            for b in range(nvertex, 2 * nvertex):
                if blossombase[b] >= 0 and blossomparent[b] == -1:
                    if label[b] == 1:
                        dualvar[b] += delta
                    elif label[b] == 2:
                        dualvar[b] -= delta
            if deltatype == 1:
                break
            if deltatype == 2:
                allowedge[deltaedge] = True
                i, j, _ = edges[deltaedge]
                if label[inblossom[i]] == 0:
                    i, j = j, i
                queue.append(i)
            elif deltatype == 3:
                allowedge[deltaedge] = True
                i, j, _ = edges[deltaedge]
                queue.append(i)
            else:
                expand_blossom(deltablossom, False)
        if not augmented:
            break
        for b in range(nvertex, 2 * nvertex):
            if blossomparent[b] == -1 and blossombase[b] >= 0 and label[b] == 1 and dualvar[b] == 0:
                expand_blossom(b, True)

    for v in range(nvertex):
        if mate[v] >= 0:
            mate[v] = endpoint[mate[v]]
    blossoms = {b: frozenset(leaves(b)) for b in range(nvertex, 2 * nvertex) if blossombase[b] >= 0}
    return mate, dualvar, blossoms


# ---------------------------------------------------------------------------
# perfect matching in minimisation form


def _scale_exponent(weights: Iterable[float]) -> int:
    """Smallest k such that w * 2**k is an integer for every weight."""
    k = 0
    for w in weights:
        if w:
            k = max(k, Fraction(w).denominator.bit_length() - 1)
    return k


def _solve_scaled(n: int, edges: Sequence[tuple[int, int, int]]):
    """Min-weight perfect matching on non-negative even integer weights.

    Returns (mate, pi, blossoms) in scaled units, or raises
    NoPerfectMatchingError."""
    if n % 2:
        raise NoPerfectMatchingError(f"odd number of vertices ({n})")
    if n == 0:
        return [], [], []
    top = max((w for _, _, w in edges), default=0) + 2
    mate, dualvar, blossoms = _max_weight_matching(n, [(u, v, top - w) for u, v, w in edges], True)
    if any(m < 0 for m in mate):
        raise NoPerfectMatchingError("graph has no perfect matching")
    # max form: y_v = dualvar/2 ; min form: pi_v = top/2 - y_v
    pi = [Fraction(top, 2) - Fraction(dualvar[v], 2) for v in range(n)]
    bl = [(verts, Fraction(dualvar[b])) for b, verts in sorted(blossoms.items()) if dualvar[b] != 0]
    return mate, pi, bl


def min_weight_perfect_matching(g: WeightedGraph) -> MatchingResult:
    shift = _scale_exponent(w for _, _, w in g.edges)
    scale = 2 ** (shift + 1)
    scaled = [(u, v, int(Fraction(w) * scale)) for u, v, w in g.edges]
    mate, pi, bl = _solve_scaled(g.n, scaled)
    wmap = {(min(u, v), max(u, v)): w for u, v, w in g.edges}
    weight = math.fsum(wmap[(v, m)] for v, m in enumerate(mate) if v < m)
    return MatchingResult(tuple(mate), weight, tuple(p / scale for p in pi),
                          tuple(Blossom(verts, z / scale) for verts, z in bl))


def certify(g: WeightedGraph, r: MatchingResult) -> list[str]:
    """Check the complementary-slackness certificate exactly.  Returns the
    list of failed conditions (empty when the matching is proven optimal)."""
    problems = []
    if any(r.mate[r.mate[v]] != v for v in range(g.n)):
        problems.append("mate is not a perfect matching")
        return problems
    member: dict[int, list[int]] = {v: [] for v in range(g.n)}
    for bi, b in enumerate(r.blossoms):
        if b.dual < 0:
            problems.append(f"blossom {bi} has negative dual")
        for v in b.vertices:
            member[v].append(bi)
    matched_in = [0] * len(r.blossoms)
    primal = Fraction(0)
    for u, v, w in g.edges:
        shared = set(member[u]) & set(member[v])
        red = Fraction(w) - r.pi[u] - r.pi[v] + sum((r.blossoms[b].dual for b in shared), Fraction(0))
        if red < 0:
            problems.append(f"edge ({u}, {v}) has negative reduced cost {float(red)}")
        if r.mate[u] == v:
            primal += Fraction(w)
            if red != 0:
                problems.append(f"matched edge ({u}, {v}) is not tight")
            for b in shared:
                matched_in[b] += 1
    for bi, b in enumerate(r.blossoms):
        if b.dual > 0 and matched_in[bi] != (len(b.vertices) - 1) // 2:
            problems.append(f"blossom {bi} with positive dual is not full")
    if primal != r.dual_objective:
        problems.append(f"primal {float(primal)} != dual {float(r.dual_objective)}")
    return problems


# ---------------------------------------------------------------------------
# 2-factor


@dataclass(frozen=True)
class TwoFactor:
    cycles: tuple[tuple[int, ...], ...]
    weight: float
    edges: frozenset[Edge]
    pricing_rounds: int


def _cycles_from_edges(vertices: Sequence[int], edges: Iterable[Edge]) -> list[tuple[int, ...]]:
    adj: dict[int, list[int]] = {v: [] for v in vertices}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen: set[int] = set()
    out = []
    for s in sorted(vertices):
        if s in seen:
            continue
        cyc = [s]
        seen.add(s)
        prev, cur = s, min(adj[s])
        while cur != s:
            cyc.append(cur)
            seen.add(cur)
            a, b = adj[cur]
            prev, cur = cur, (b if a == prev else a)
        out.append(tuple(cyc))
    return out


def _two_factor_on(k: int, dist: np.ndarray, edges: Sequence[Edge], shift: int):
    """Exact min 2-factor on local vertices 0..k-1 restricted to `edges`.
    Returns (chosen local edges, max pi per vertex in scaled units)."""
    scale = 2 ** (shift + 2)
    nodes = 2 * k
    medges = []
    for u, v in edges:
        a = int(Fraction(float(dist[u, v])) * scale)  # divisible by 4
        gu, gv = nodes, nodes + 1
        nodes += 2
        half = a // 2
        medges += [(2 * u, gu, half), (2 * u + 1, gu, half), (gu, gv, 0), (gv, 2 * v, half), (gv, 2 * v + 1, half)]
    mate, pi, _ = _solve_scaled(nodes, medges)
    chosen = []
    for idx, (u, v) in enumerate(edges):
        gu = 2 * k + 2 * idx
        if mate[gu] != gu + 1:
            chosen.append((u, v))
    best = [max(pi[2 * v], pi[2 * v + 1]) for v in range(k)]
    return chosen, best, scale


def min_weight_two_factor(instance, vertices: Sequence[int] | None = None,
                          edges: Iterable[Edge] | None = None, seed_k: int = 8) -> TwoFactor:
    """Minimum-weight 2-factor on `vertices` (default: all points).

    `edges` restricts the usable edges (default: every pair).  The solve
    starts from the `seed_k` nearest neighbours of every vertex and adds
    edges with negative reduced cost until the duals prove optimality for
    the full edge set.
    """
    verts = sorted(range(instance.n) if vertices is None else set(vertices))
    k = len(verts)
    if k < 3:
        raise TooFewPointsError(f"a 2-factor needs at least 3 vertices, got {k}")
    local = {v: i for i, v in enumerate(verts)}
    dist = instance.dist[np.ix_(verts, verts)]
    if edges is None:
        allowed = np.ones((k, k), dtype=bool)
    else:
        allowed = np.zeros((k, k), dtype=bool)
        for u, v in edges:
            if u in local and v in local and u != v:
                allowed[local[u], local[v]] = allowed[local[v], local[u]] = True
    np.fill_diagonal(allowed, False)
    iu, ju = np.nonzero(np.triu(allowed, 1))
    shift = _scale_exponent(dist[iu, ju].tolist())
    for v in range(k):
        if allowed[v].sum() < 2:
            raise NoPerfectMatchingError(f"vertex {verts[v]} has fewer than 2 usable edges")

    active: set[Edge] = set()
    kk = min(seed_k, k - 1)
    while True:
        masked = np.where(allowed, dist, np.inf)
        order = np.argsort(masked, axis=1, kind="stable")
        for v in range(k):
            for w in order[v, :kk]:
                if allowed[v, w]:
                    active.add((min(v, int(w)), max(v, int(w))))
        try:
            chosen, best, scale = _two_factor_on(k, dist, sorted(active), shift)
            break
        except NoPerfectMatchingError:
            if kk >= k - 1:
                raise
            kk = min(2 * kk, k - 1)

    rounds = 1
    while True:
        bestf = np.array([float(b) for b in best])
        red = dist * scale - bestf[:, None] - bestf[None, :]
        cand = np.argwhere(np.triu(allowed, 1) & (red < 1e-6 * scale * (1.0 + dist)))
        new = []
        for u, v in cand:
            e = (int(u), int(v))
            if e in active:
                continue
            exact = Fraction(float(dist[u, v])) * scale - best[u] - best[v]
            if exact < 0:
                new.append((exact, e))
        if not new:
            break
        new.sort()
        active.update(e for _, e in new[: max(4 * k, 16)])
        chosen, best, scale = _two_factor_on(k, dist, sorted(active), shift)
        rounds += 1

    gl = [(verts[u], verts[v]) for u, v in chosen]
    chosen_set = frozenset((min(e), max(e)) for e in gl)
    cycles = _cycles_from_edges(verts, chosen_set)
    return TwoFactor(tuple(cycles), instance.length(chosen_set), chosen_set, rounds)


def brute_force_perfect_matching(g: WeightedGraph) -> float:
    """Exhaustive minimum (oracle for small graphs)."""
    wmap = {}
    for u, v, w in g.edges:
        wmap[(u, v)] = wmap[(v, u)] = w
    best = math.inf

    def rec(free: list[int], acc: float):
        nonlocal best
        if acc >= best:
            return
        if not free:
            best = acc
            return
        u = free[0]
        for i in range(1, len(free)):
            v = free[i]
            if (u, v) in wmap:
                rec(free[1:i] + free[i + 1:], acc + wmap[(u, v)])

    rec(list(range(g.n)), 0.0)
    if math.isinf(best):
        raise NoPerfectMatchingError("graph has no perfect matching")
    return best
