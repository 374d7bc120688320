"""Command-line entry point.

Exit codes: 0 success, 1 error, 2 infeasible or failed validation,
3 time limit reached.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from . import plotting
from .approx import approximate
from .arrangement import EdgeSolution, extract_cycles, is_feasible
from .errors import MPPError
from .geometry import Metric
from .instances import (GadgetParams, Instance, generate_from_brightness, parse_solution, read_graph,
                        read_instance, reduce_vertex_cover, uniform_instance, write_instance, write_solution)
from .ip import Status
from .separation import CutConfig
from .solver import SolveConfig, oracle, solve

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE, EXIT_TIME_LIMIT = 0, 1, 2, 3

log = logging.getLogger("mpp")


def _load(path: str, metric: str) -> Instance:
    inst = read_instance(path)
    if metric == "euclid":
        inst = inst.with_metric(Metric.EUCLID)
    return inst


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _write_outputs(args, inst: Instance, polygon, report: dict, cuts=()) -> None:
    if polygon is not None and args.out:
        _emit(write_solution(inst.name, polygon.length, polygon.edges, polygon.cycles), args.out)
    if polygon is not None and args.svg:
        spec = plotting.RenderSpec(show_cuts=bool(cuts))
        plotting.render_polygon(args.svg, inst, polygon.outer, polygon.holes, cuts, spec,
                                title=f"{inst.name}: {polygon.length:.6g}")
    if args.report:
        _emit(json.dumps(report, indent=2) + "\n", args.report)
    if not args.quiet:
        print(json.dumps(report))


def cmd_solve(args) -> int:
    inst = _load(args.input, args.metric)
    cfg = SolveConfig(cuts=CutConfig.parse(args.cuts), jumpstart=args.jumpstart,
                      time_limit=args.time_limit, seed=args.seed)
    rep = solve(inst, cfg)
    last = [c for c in rep.cuts][-20:] if args.show_cuts else ()
    _write_outputs(args, inst, rep.polygon, rep.to_json(), last)
    if rep.status is Status.TIME_LIMIT:
        return EXIT_TIME_LIMIT
    if rep.status is Status.INFEASIBLE:
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_approx(args) -> int:
    inst = _load(args.input, args.metric)
    t0 = time.perf_counter()
    res = approximate(inst)
    cert = res.certificate
    report = {"status": "FEASIBLE", "objective": res.length, "hull_perimeter": cert.hull_perimeter,
              "two_factor": cert.two_factor_weight, "bound": cert.bound,
              "phase1_steps": len(res.phase1), "phase2_ops": len(res.phase2),
              "wall_ms": round((time.perf_counter() - t0) * 1000.0, 3)}
    _write_outputs(args, inst, res.polygon, report)
    return EXIT_OK


def cmd_oracle(args) -> int:
    inst = _load(args.input, args.metric)
    t0 = time.perf_counter()
    res = oracle(inst)
    report = {"status": "OPTIMAL", "objective": res.objective,
              "wall_ms": round((time.perf_counter() - t0) * 1000.0, 3)}
    _write_outputs(args, inst, res.polygon, report)
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.uniform:
        inst = uniform_instance(args.n, args.seed, size=args.size, name=args.name)
    elif args.image:
        with open(args.image, "rb") as fh:
            data = fh.read()
        inst = generate_from_brightness(data, args.n, args.threshold, args.seed, name=args.name)
    else:
        log.error("gen needs --uniform or --image")
        return EXIT_ERROR
    _emit(write_instance(inst), args.out)
    return EXIT_OK


def cmd_reduce(args) -> int:
    graph = read_graph(args.graph)
    params = GadgetParams(a=args.a, b=args.b, eps=args.eps, d=args.d, T=args.T)
    red = reduce_vertex_cover(graph, args.k, params)
    _emit(write_instance(red.instance), args.out)
    info = {"threshold": red.threshold, "k": red.k, "points": red.instance.n, "rhombi": red.rhombi,
            "T": red.T, "gadgets": red.counts()}
    print(json.dumps(info), file=sys.stdout if args.out not in (None, "-") else sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    inst = _load(args.instance, args.metric)
    with open(args.solution) as fh:
        rec = parse_solution(fh.read())
    bad = [e for e in rec.edges if not (0 <= e[0] < inst.n and 0 <= e[1] < inst.n) or e[0] == e[1]]
    if bad:
        print(f"invalid: edge {bad[0]} out of range")
        return EXIT_INFEASIBLE
    check = is_feasible(EdgeSolution(inst, frozenset((min(e), max(e)) for e in rec.edges)))
    if not check.feasible:
        print("invalid: " + "; ".join(check.violations[:5]))
        return EXIT_INFEASIBLE
    length = check.polygon.length
    if abs(length - rec.objective) > 1e-9 * max(1.0, abs(length)):
        print(f"invalid: objective {rec.objective!r} but the edges measure {length!r}")
        return EXIT_INFEASIBLE
    print(f"valid: {length!r}")
    return EXIT_OK


def cmd_render(args) -> int:
    inst = _load(args.instance, args.metric)
    spec = plotting.RenderSpec(width=args.size, height=args.size, show_points=not args.no_points,
                               show_outer=not args.no_outer, show_holes=not args.no_holes,
                               labels=args.labels)
    outer, holes = None, []
    if args.solution:
        with open(args.solution) as fh:
            rec = parse_solution(fh.read())
        sol = EdgeSolution(inst, frozenset((min(e), max(e)) for e in rec.edges))
        check = is_feasible(sol)
        if check.feasible:
            outer, holes = check.polygon.outer, check.polygon.holes
        else:
            cycles = extract_cycles(sol).cycles
            holes = list(cycles)
    plotting.render_polygon(args.svg, inst, outer, holes, (), spec, title=inst.name)
    return EXIT_OK


VARIANTS = {
    "+JS+DC+TC+HIHC": SolveConfig(),
    "+DC+TC+HIHC": SolveConfig(jumpstart=False),
    "+JS+DC": SolveConfig(cuts=CutConfig.parse("dsc,crossing")),
    "+JS": SolveConfig(cuts=CutConfig.parse("crossing")),
}


def _bench_one(path: str, variant: str, time_limit: float, metric: str) -> dict:
    inst = _load(path, metric)
    base = VARIANTS[variant]
    cfg = SolveConfig(cuts=base.cuts, jumpstart=base.jumpstart, time_limit=time_limit)
    try:
        rep = solve(inst, cfg)
        status, obj, rounds, wall = rep.status.value, rep.objective, rep.iterations, rep.wall_time
    except MPPError as exc:
        log.warning("%s / %s: %s", inst.name, variant, exc)
        status, obj, rounds, wall = "ERROR", None, None, float("nan")
    return {"instance": inst.name, "n": inst.n, "variant": variant, "status": status,
            "objective": obj, "rounds": rounds, "wall_ms": round(wall * 1000.0, 3)}


def cmd_bench(args) -> int:
    files = sorted(os.path.join(args.dir, f) for f in os.listdir(args.dir)
                   if f.endswith((".tsp", ".inst")))
    if not files:
        log.error("no .tsp or .inst files in %s", args.dir)
        return EXIT_ERROR
    variants = args.variants.split(",") if args.variants else list(VARIANTS)
    for v in variants:
        if v not in VARIANTS:
            log.error("unknown variant %r; choose from %s", v, ", ".join(VARIANTS))
            return EXIT_ERROR
    jobs = [(f, v) for f in files for v in variants]
    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        rows = list(pool.map(lambda j: _bench_one(j[0], j[1], args.time_limit, args.metric), jobs))
    fields = ["instance", "n", "variant", "status", "objective", "rounds", "wall_ms"]
    with open(args.csv, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        w.writerows(rows)
    figure = args.figure or os.path.splitext(args.csv)[0] + ".svg"
    plotting.render_bench(figure, rows, variants)
    if not args.quiet:
        for r in rows:
            print(f"{r['instance']:>12} {r['variant']:>16} {r['status']:>10} {r['wall_ms']:>12}")
    return EXIT_OK if all(r["status"] == "OPTIMAL" for r in rows) else EXIT_TIME_LIMIT


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mpp", description="Minimum perimeter polygon toolkit")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def outputs(sp):
        sp.add_argument("--metric", choices=("euclid", "tsplib"), default="tsplib",
                        help="tsplib keeps the metric stored with the instance")
        sp.add_argument("--out", help="solution file")
        sp.add_argument("--svg", help="render the polygon to this SVG file")
        sp.add_argument("--report", help="JSON report file")
        sp.add_argument("-q", "--quiet", action="store_true")

    sp = sub.add_parser("solve", help="exact solve by cutting planes")
    sp.add_argument("input")
    sp.add_argument("--time-limit", type=float)
    sp.add_argument("--cuts", default="all", help="comma list of dsc,glue,tail,hih,crossing; all or none")
    sp.add_argument("--jumpstart", action=argparse.BooleanOptionalAction, default=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--show-cuts", action="store_true", help="draw the last cuts in the SVG")
    outputs(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("approx", help="factor-3 approximation")
    sp.add_argument("input")
    outputs(sp)
    sp.set_defaults(func=cmd_approx)

    sp = sub.add_parser("oracle", help="exhaustive search, n <= 12")
    sp.add_argument("input")
    outputs(sp)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("gen", help="generate an instance")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--uniform", action="store_true")
    src.add_argument("--image", help="PGM brightness map")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threshold", type=float, default=0.0)
    sp.add_argument("--size", type=float, default=1000.0, help="square side for --uniform")
    sp.add_argument("--name")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("reduce", help="vertex cover gadget instance")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--a", type=float, default=1e4)
    sp.add_argument("--b", type=float, default=100.0)
    sp.add_argument("--eps", type=float, default=1.0)
    sp.add_argument("--d", type=float, default=1e6)
    sp.add_argument("--T", type=float)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("validate", help="check a solution file")
    sp.add_argument("instance")
    sp.add_argument("solution")
    sp.add_argument("--metric", choices=("euclid", "tsplib"), default="tsplib")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("render", help="draw an instance and optional solution")
    sp.add_argument("instance")
    sp.add_argument("solution", nargs="?")
    sp.add_argument("--svg", required=True)
    sp.add_argument("--size", type=float, default=6.0, help="canvas side in inches")
    sp.add_argument("--no-points", action="store_true")
    sp.add_argument("--no-outer", action="store_true")
    sp.add_argument("--no-holes", action="store_true")
    sp.add_argument("--labels", action="store_true")
    sp.add_argument("--metric", choices=("euclid", "tsplib"), default="tsplib")
    sp.set_defaults(func=cmd_render)

    sp = sub.add_parser("bench", help="variant x instance runtime table")
    sp.add_argument("--dir", required=True)
    sp.add_argument("--time-limit", type=float, default=60.0)
    sp.add_argument("--csv", required=True)
    sp.add_argument("--figure", help="SVG chart (default: next to the CSV)")
    sp.add_argument("--variants", help="comma list of " + ", ".join(VARIANTS))
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--metric", choices=("euclid", "tsplib"), default="tsplib")
    sp.add_argument("-q", "--quiet", action="store_true")
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (MPPError, ValueError, OSError) as exc:
        print(f"mpp: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
