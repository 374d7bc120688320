import itertools
import math
import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mpp.geometry import is_simple_cycle
from mpp.instances import Instance

settings.register_profile("ci", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")

ROOT = Path(__file__).resolve().parents[1]
TSPLIB_DIR = ROOT / "data" / "tsplib"

SQ3_COORDS = [(0, 0), (10, 0), (10, 10), (0, 10), (4, 4), (6, 4), (5, 6)]
# brute force over every simple polygon and every square-plus-hole split,
# see test_sq3_brute_force; the square + triangle reading is 40 + 2 + 2*sqrt(5)
SQ3_OPTIMUM = 45.78584445398434
SQ3_SQUARE_PLUS_HOLE = 40 + 2 + 2 * math.sqrt(5)


@pytest.fixture
def sq3():
    return Instance.from_coords(SQ3_COORDS, "sq3")


def random_instance(seed: int, n: int | None = None, size: int = 100) -> Instance:
    """Integer coordinates in general-ish position; n drawn from [5, 10]."""
    rng = np.random.default_rng(seed)
    if n is None:
        n = int(rng.integers(5, 11))
    pts = set()
    while len(pts) < n:
        pts.add((int(rng.integers(0, size)), int(rng.integers(0, size))))
    return Instance.from_coords(sorted(pts), f"rand-{seed}")


def oracle_instances(count: int = 30, first_seed: int = 0, min_interior: int = 3, need: int = 10):
    """`count` random instances, at least `need` of which have
    `min_interior` or more interior points."""
    out, rich = [], 0
    seed = first_seed
    while len(out) < count:
        inst = random_instance(seed)
        seed += 1
        if len(inst.interior) >= min_interior:
            rich += 1
        elif count - len(out) <= need - rich:
            continue
        try:
            inst.candidate_edges
        except Exception:
            continue
        out.append(inst)
    return out


def brute_simple_polygons(inst: Instance):
    """Every simple polygon through all points, as a vertex cycle."""
    n = inst.n
    for perm in itertools.permutations(range(1, n)):
        if perm[0] > perm[-1]:
            continue
        cyc = (0, *perm)
        if is_simple_cycle([inst.points[v] for v in cyc]):
            yield cyc


def cycle_length(inst: Instance, cyc) -> float:
    return sum(inst.cost(cyc[i], cyc[(i + 1) % len(cyc)]) for i in range(len(cyc)))


def tsplib_path(name: str) -> Path | None:
    for d in (TSPLIB_DIR, Path(os.environ.get("MPP_TSPLIB_DIR", TSPLIB_DIR))):
        p = d / f"{name}.tsp"
        if p.exists():
            return p
    return None


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion(request):
    """Record the verdict of an acceptance criterion: call with
    (number, passed, detail) before asserting."""
    def record(number: int, passed: bool, detail: str) -> None:
        ACCEPTANCE[number] = (passed, detail)
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
