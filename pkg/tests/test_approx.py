import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mpp.approx import approximate, phase1_flatten, phase2_untangle
from mpp.arrangement import EdgeSolution, is_feasible
from mpp.instances import Instance
from mpp.matching import min_weight_two_factor
from mpp.solver import oracle

from conftest import SQ3_SQUARE_PLUS_HOLE, cycle_length, oracle_instances


def hull_xy(points):
    pts = sorted(set(points))

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and ((out[-1][0] - out[-2][0]) * (p[1] - out[-2][1])
                                     - (out[-1][1] - out[-2][1]) * (p[0] - out[-2][0])) <= 0:
                out.pop()
            out.append(p)
        return out
    lower, upper = half(pts), half(pts[::-1])
    return lower[:-1] + upper[:-1]


def perimeter_xy(poly):
    return sum(math.dist(poly[i], poly[(i + 1) % len(poly)]) for i in range(len(poly)))


def test_convex_position_returns_hull():
    inst = Instance.from_coords([(math.cos(t), math.sin(t)) for t in np.linspace(0, 6, 9)])
    res = approximate(inst)
    assert res.polygon.holes == ()
    assert res.length == pytest.approx(inst.hull_perimeter)
    assert res.certificate.bound == pytest.approx(inst.hull_perimeter)


def test_sq3_square_with_triangle_hole(sq3):
    res = approximate(sq3)
    assert len(res.polygon.holes) == 1
    assert res.length == pytest.approx(SQ3_SQUARE_PLUS_HOLE, abs=1e-9)
    assert res.certificate.two_factor_weight == pytest.approx(2 + 2 * math.sqrt(5))
    assert not res.phase1 and not res.phase2


NESTED = [(0, 0), (100, 0), (100, 100), (0, 100),
          (20, 20), (80, 20), (80, 80), (20, 80),
          (45, 45), (55, 45), (50, 55)]


def test_nested_triangles_inside_square():
    inst = Instance.from_coords(NESTED)
    tf = min_weight_two_factor(inst, inst.interior, inst.candidate_edges)
    res = approximate(inst)
    assert is_feasible(EdgeSolution(inst, res.polygon.edges)).feasible
    assert res.length <= inst.hull_perimeter + 2 * tf.weight + 1e-9
    assert res.length >= oracle(inst).objective - 1e-9
    assert len(res.phase1) == 1


def test_phase1_identity_without_nesting():
    inst = Instance.from_coords([(0, 0), (2, 0), (1, 2), (5, 0), (7, 0), (6, 2)])
    walks, steps = phase1_flatten(inst, [(0, 1, 2), (3, 4, 5)])
    assert steps == []
    assert [w.walk for w in walks] == [(0, 1, 2), (3, 4, 5)]


def test_phase1_single_child_matches_convex_chain():
    coords = [(0, 0), (100, 0), (50, 90), (40, 20), (60, 20), (50, 35)]
    inst = Instance.from_coords(coords)
    walks, steps = phase1_flatten(inst, [(0, 1, 2), (3, 4, 5)])
    (step,) = steps
    # the taut path from p to q around the child is the convex chain of
    # {p, q} and the child, the part of that hull not using segment pq
    pv = step.cycle
    k = len(pv)
    j = max(range(k), key=lambda i: (inst.cost(pv[i], pv[(i + 1) % k]), -i))
    p, q = pv[j], pv[(j + 1) % k]
    hull = hull_xy([coords[p], coords[q]] + coords[3:])
    chain = perimeter_xy(hull) - math.dist(coords[p], coords[q])
    rest = step.cycle_length - inst.cost(p, q)
    assert step.walk_length == pytest.approx(chain + rest, abs=1e-9)
    assert step.walk_length <= 2 * step.cycle_length
    assert (step.forest_edges_before, step.forest_edges_after) == (1, 0)


def test_phase1_depth_two_chain_takes_two_steps():
    inst = Instance.from_coords([(0, 0), (300, 0), (150, 260),
                                 (100, 40), (200, 40), (150, 150),
                                 (140, 60), (160, 60), (150, 80)])
    walks, steps = phase1_flatten(inst, [(0, 1, 2), (3, 4, 5), (6, 7, 8)])
    assert len(steps) == 2
    assert [(s.forest_edges_before, s.forest_edges_after) for s in steps] == [(3, 2), (2, 0)]
    for s in steps:
        assert s.forest_edges_after < s.forest_edges_before
        assert s.walk_length <= 2 * s.cycle_length + 1e-9


def test_phase2_identity_on_simple_disjoint_cycles():
    inst = Instance.from_coords([(0, 0), (2, 0), (1, 2), (5, 0), (7, 0), (6, 2)])
    out, ops = phase2_untangle(inst, [(0, 1, 2), (3, 4, 5)])
    assert ops == []
    assert sorted(out) == [(0, 1, 2), (3, 4, 5)]


BOWTIE = [(0, 0), (2, -1), (2, 1), (-2, 1), (-2, -1)]


def test_phase2_figure_eight_pinch():
    inst = Instance.from_coords(BOWTIE)
    before = cycle_length(inst, (0, 1, 2, 0, 3, 4))
    out, ops = phase2_untangle(inst, [(0, 1, 2, 0, 3, 4)])
    assert len(out) == 1 and len(set(out[0])) == len(out[0]) == 5
    after = cycle_length(inst, out[0])
    assert after < before
    assert ops[-1].length_after == pytest.approx(after)


def test_phase2_cycles_sharing_a_vertex_merge():
    inst = Instance.from_coords(BOWTIE)
    before = cycle_length(inst, (0, 1, 2)) + cycle_length(inst, (0, 3, 4))
    out, ops = phase2_untangle(inst, [(0, 1, 2), (0, 3, 4)])
    assert len(out) == 1
    assert cycle_length(inst, out[0]) < before
    assert ops[0].kind == "merge"


@pytest.mark.parametrize("inst", oracle_instances(20, first_seed=500), ids=lambda i: i.name)
def test_factor_three_and_certificate(inst):
    opt = oracle(inst).objective
    res = approximate(inst)
    assert is_feasible(EdgeSolution(inst, res.polygon.edges)).feasible
    assert opt - 1e-9 <= res.length <= 3 * opt + 1e-9
    assert res.certificate.holds


@given(st.integers(0, 100_000))
def test_approximation_is_feasible_on_random_inputs(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(6, 30))
    inst = Instance.from_coords({tuple(p) for p in rng.integers(0, 200, (n, 2)).tolist()})
    res = approximate(inst)
    assert is_feasible(EdgeSolution(inst, res.polygon.edges)).feasible
    assert res.certificate.holds
    assert res.length >= inst.hull_perimeter - 1e-9
    for s in res.phase1:
        assert s.forest_edges_after < s.forest_edges_before
    for op in res.phase2:
        assert op.length_after < op.length_before
