import math

import pytest

from mpp.arrangement import EdgeSolution, is_feasible
from mpp.errors import TooLargeError
from mpp.instances import Instance, uniform_instance
from mpp.ip import BranchAndBoundBackend, Status
from mpp.separation import CutConfig
from mpp.solver import SolveConfig, enumerate_feasible, jumpstart, oracle, solve

from conftest import SQ3_OPTIMUM, SQ3_SQUARE_PLUS_HOLE, brute_simple_polygons, cycle_length, oracle_instances


def test_sq3_brute_force(sq3):
    best_simple = min(cycle_length(sq3, c) for c in brute_simple_polygons(sq3))
    assert best_simple == pytest.approx(SQ3_OPTIMUM, abs=1e-12)
    assert best_simple < SQ3_SQUARE_PLUS_HOLE
    assert oracle(sq3).objective == pytest.approx(SQ3_OPTIMUM, abs=1e-12)


def test_sq3_solve(sq3):
    rep = solve(sq3)
    assert rep.status is Status.OPTIMAL
    assert rep.objective == pytest.approx(SQ3_OPTIMUM, abs=1e-9)
    assert rep.polygon.holes == ()
    assert rep.jumpstart_objective == pytest.approx(SQ3_OPTIMUM, abs=1e-9)


def test_convex_position_needs_no_rounds():
    inst = Instance.from_coords([(0, 0), (3, 0), (4, 2), (1, 3)])
    rep = solve(inst, SolveConfig(jumpstart=False))
    assert rep.iterations == 0
    assert rep.objective == pytest.approx(inst.hull_perimeter)


def test_triangle_oracle():
    inst = Instance.from_coords([(0, 0), (4, 0), (0, 3)])
    assert oracle(inst).objective == 12.0


def test_two_interior_points_force_a_simple_polygon():
    inst = Instance.from_coords([(0, 0), (10, 0), (10, 10), (0, 10), (4, 5), (6, 5)])
    res = oracle(inst)
    assert res.polygon.holes == ()
    assert len(res.polygon.outer) == 6


def test_oracle_refuses_large_instances():
    with pytest.raises(TooLargeError):
        oracle(uniform_instance(13, seed=0))


def test_enumeration_members_are_feasible(sq3):
    sols = list(enumerate_feasible(sq3))
    assert sols
    assert all(is_feasible(s).feasible for s in sols)
    assert len({s.chosen for s in sols}) == len(sols)
    # the square with the triangle hole is one of them
    sq = EdgeSolution.from_cycles(sq3, [(0, 1, 2, 3), (4, 5, 6)]).chosen
    assert sq in {s.chosen for s in sols}


@pytest.mark.parametrize("inst", oracle_instances(12, first_seed=300), ids=lambda i: i.name)
def test_solve_matches_oracle(inst):
    opt = oracle(inst).objective
    rep = solve(inst)
    assert rep.status is Status.OPTIMAL
    assert rep.objective == pytest.approx(opt, rel=1e-9)
    assert rep.objective >= inst.hull_perimeter - 1e-9
    if rep.jumpstart_objective is not None:
        assert rep.jumpstart_objective >= opt - 1e-9


@pytest.mark.parametrize("inst", oracle_instances(4, first_seed=700), ids=lambda i: i.name)
def test_solve_with_branch_and_bound_backend(inst):
    rep = solve(inst, SolveConfig(backend=BranchAndBoundBackend()))
    assert rep.objective == pytest.approx(oracle(inst).objective, rel=1e-9)


@pytest.mark.parametrize("families", ["none", "dsc", "glue,tail,hih"])
def test_reduced_cut_sets_still_reach_the_optimum(families, sq3):
    rep = solve(sq3, SolveConfig(cuts=CutConfig.parse(families), jumpstart=False))
    assert rep.objective == pytest.approx(SQ3_OPTIMUM, abs=1e-9)


def test_jumpstart_is_feasible_and_not_better():
    inst = uniform_instance(25, seed=4)
    js = jumpstart(inst)
    assert js is not None and is_feasible(js).feasible
    rep = solve(inst)
    assert inst.length(js.chosen) >= rep.objective - 1e-9


def test_round_cap_reports_time_limit():
    inst = uniform_instance(30, seed=1)
    rep = solve(inst, SolveConfig(jumpstart=False, max_rounds=1))
    assert rep.status is Status.TIME_LIMIT
    assert rep.iterations == 1
    assert rep.objective is None


def test_report_json(sq3):
    data = solve(sq3).to_json()
    assert data["status"] == "OPTIMAL"
    assert math.isclose(data["objective"], SQ3_OPTIMUM)
