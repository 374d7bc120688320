import functools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpp.arrangement import EdgeSolution, is_feasible
from mpp.errors import NotSeparableError
from mpp.instances import Instance
from mpp.ip import CutKind
from mpp.separation import CutConfig, crossing_pair_cut, glue_cut, hih_cut, separate, tail_cut
from mpp.solver import enumerate_feasible

from conftest import oracle_instances, random_instance

SIDE_BY_SIDE = [(0, 0), (2, 0), (1, 2), (5, 0), (7, 0), (6, 2)]
P2_INSTANCE = [(0, 0), (10, 0), (10, 10), (0, 10), (5, 2), (5, 8), (4, 9), (6, 9)]
DEPTH2 = [(0, 0), (100, 0), (100, 100), (0, 100),
          (20, 20), (80, 20), (50, 80),
          (45, 35), (55, 35), (50, 45)]


def sol(coords, cycles):
    inst = Instance.from_coords(coords)
    return EdgeSolution.from_cycles(inst, cycles)


def test_cut_config_parse():
    assert CutConfig.parse("all") == CutConfig()
    assert CutConfig.parse("none").families() == []
    assert CutConfig.parse("glue, tail").families() == ["glue", "tail"]
    with pytest.raises(ValueError):
        CutConfig.parse("glue,bogus")


def test_crossing_pair_cut_on_square_diagonals():
    inst = Instance.from_coords([(0, 0), (1, 0), (1, 1), (0, 1)])
    c = crossing_pair_cut(inst, (0, 2), (1, 3))
    assert c.coeffs == (((0, 2), 1), ((1, 3), 1))
    assert (c.sense, c.rhs) == ("<=", 1)
    with pytest.raises(ValueError):
        crossing_pair_cut(inst, (0, 1), (2, 3))


def test_glue_cut_on_side_by_side_triangles():
    s = sol(SIDE_BY_SIDE, [(0, 1, 2), (3, 4, 5)])
    c = glue_cut(s)
    assert c.kind is CutKind.GLUE and c.rhs == 2
    assert c.lhs(s.chosen) == 0
    assert any(k.kind is CutKind.GLUE for k in separate(s))


def test_glue_cut_needs_two_hull_components(sq3):
    s = EdgeSolution.from_cycles(sq3, [(0, 1, 2, 3), (4, 5, 6)])
    with pytest.raises(ValueError):
        glue_cut(s)


def test_tail_cut_on_stranded_cycle():
    s = sol(P2_INSTANCE, [(0, 1, 2, 4, 3), (5, 6, 7)])
    c = tail_cut(s, (5, 6, 7))
    assert c.kind is CutKind.TAIL and c.rhs == 1
    assert c.lhs(s.chosen) == 0


def test_tail_cut_rejects_hull_and_enclosed_cycles(sq3):
    s = EdgeSolution.from_cycles(sq3, [(0, 1, 2, 3), (4, 5, 6)])
    with pytest.raises(ValueError):
        tail_cut(s, (0, 1, 2, 3))
    with pytest.raises(ValueError):
        tail_cut(s, (4, 5, 6))


def test_hih_cut_on_depth_two_chain():
    s = sol(DEPTH2, [(0, 1, 2, 3), (4, 5, 6), (7, 8, 9)])
    c = hih_cut(s, (7, 8, 9))
    assert c.kind is CutKind.HIH and c.rhs == -1
    assert c.lhs(s.chosen) == -2
    assert any(k.kind is CutKind.HIH for k in separate(s))


def test_hih_cut_rejects_depth_one(sq3):
    s = EdgeSolution.from_cycles(sq3, [(0, 1, 2, 3), (4, 5, 6)])
    with pytest.raises(ValueError):
        hih_cut(s, (4, 5, 6))


def test_feasible_selection_is_not_separable(sq3):
    s = EdgeSolution.from_cycles(sq3, [(0, 1, 2, 3), (4, 5, 6)])
    with pytest.raises(NotSeparableError):
        separate(s)


def test_p1_cycle_gets_subtour_cut(sq3):
    s = EdgeSolution.from_cycles(sq3, [(0, 1, 4), (2, 3, 6, 5)])
    cuts = separate(s)
    sub = [c for c in cuts if c.kind in (CutKind.SUBTOUR, CutKind.DSC)]
    assert any({e for e, _ in c.coeffs} == {(0, 1), (1, 4), (0, 4)} for c in sub)
    assert all(c.violated_by(s.chosen) for c in cuts)


def random_two_factor(inst, rng):
    n = inst.n
    order = [int(v) for v in rng.permutation(n)]
    cuts = sorted(rng.choice(range(3, n - 2), size=int(rng.integers(0, 2)), replace=False).tolist()) \
        if n >= 6 else []
    cycles, start = [], 0
    for c in cuts + [n]:
        cycles.append(order[start:c])
        start = c
    return EdgeSolution.from_cycles(inst, cycles)


@functools.lru_cache(maxsize=None)
def feasible_sets(seed):
    inst = random_instance(seed, n=7)
    return inst, [f.chosen for f in enumerate_feasible(inst)]


@settings(max_examples=40)
@given(st.integers(0, 15), st.integers(0, 10_000), st.sampled_from(["all", "dsc,glue,tail,hih", "none"]))
def test_cuts_are_violated_by_input_and_valid(inst_seed, seed, families):
    inst, feas = feasible_sets(inst_seed)
    s = random_two_factor(inst, np.random.default_rng(seed))
    if is_feasible(s).feasible:
        return
    try:
        cuts = separate(s, CutConfig.parse(families))
    except NotSeparableError:
        return
    for c in cuts:
        assert c.violated_by(s.chosen)
        assert all(c.satisfied_by(f) for f in feas), c


@pytest.mark.parametrize("inst", oracle_instances(6, first_seed=900), ids=lambda i: i.name)
def test_separated_cuts_hold_on_all_feasible_solutions(inst):
    feas = [f.chosen for f in enumerate_feasible(inst)]
    rng = np.random.default_rng(inst.n)
    for _ in range(30):
        s = random_two_factor(inst, rng)
        if is_feasible(s).feasible:
            continue
        try:
            cuts = separate(s)
        except NotSeparableError:
            continue
        for c in cuts:
            assert all(c.satisfied_by(f) for f in feas)
