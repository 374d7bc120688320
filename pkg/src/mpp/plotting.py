"""SVG figures: polygons with holes, cut supports, and benchmark charts.

Figures are built on bare ``matplotlib.figure.Figure`` objects so that
rendering from worker threads never touches pyplot's global state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
from matplotlib.collections import LineCollection  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from .instances import Instance  # noqa: E402
from .ip import Cut  # noqa: E402

OUTER = "#1f4e79"
HOLE = "#c0504d"
CUT = "#7f7f7f"


@dataclass(frozen=True)
class RenderSpec:
    width: float = 6.0           # inches
    height: float = 6.0
    point_size: float = 6.0
    outer_width: float = 1.4
    hole_width: float = 1.0
    cut_width: float = 0.6
    show_points: bool = True
    show_outer: bool = True
    show_holes: bool = True
    show_cuts: bool = False
    labels: bool = False


def _segments(inst: Instance, cycle: Sequence[int]) -> list:
    pts = inst.points
    return [((pts[a].x, pts[a].y), (pts[b].x, pts[b].y)) for a, b in zip(cycle, (*cycle[1:], cycle[0]))]


def draw_polygon(ax, inst: Instance, outer: Sequence[int] | None, holes: Iterable[Sequence[int]] = (),
                 cuts: Iterable[Cut] = (), spec: RenderSpec = RenderSpec()) -> None:
    pts = inst.points
    if spec.show_cuts:
        segs = []
        for c in cuts:
            segs += [((pts[u].x, pts[u].y), (pts[v].x, pts[v].y)) for (u, v), _ in c.coeffs]
        if segs:
            ax.add_collection(LineCollection(segs, colors=CUT, linewidths=spec.cut_width,
                                             linestyles="dashed", zorder=1))
    if spec.show_outer and outer:
        ax.add_collection(LineCollection(_segments(inst, outer), colors=OUTER,
                                         linewidths=spec.outer_width, zorder=2))
    if spec.show_holes:
        for h in holes:
            ax.add_collection(LineCollection(_segments(inst, h), colors=HOLE,
                                             linewidths=spec.hole_width, zorder=2))
    if spec.show_points:
        ax.scatter([p.x for p in pts], [p.y for p in pts], s=spec.point_size, c="black", zorder=3,
                   linewidths=0)
    if spec.labels:
        for p in pts:
            ax.annotate(str(p.id), (p.x, p.y), fontsize=6, xytext=(2, 2), textcoords="offset points")
    ax.set_aspect("equal")
    ax.autoscale_view()
    ax.set_xticks([])
    ax.set_yticks([])


def render_polygon(path, inst: Instance, outer: Sequence[int] | None, holes: Iterable[Sequence[int]] = (),
                   cuts: Iterable[Cut] = (), spec: RenderSpec = RenderSpec(), title: str | None = None) -> None:
    fig = Figure(figsize=(spec.width, spec.height))
    ax = fig.add_subplot()
    draw_polygon(ax, inst, outer, holes, cuts, spec)
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, format="svg")


def render_bench(path, rows: Sequence[Mapping], variants: Sequence[str]) -> None:
    """Grouped horizontal bars of wall time per instance and variant; runs
    that did not finish are drawn hatched at their time limit."""
    names = list(dict.fromkeys(r["instance"] for r in rows))
    by_key = {(r["instance"], r["variant"]): r for r in rows}
    fig = Figure(figsize=(7.0, 0.45 * len(names) * max(1, len(variants)) ** 0.5 + 1.5))
    ax = fig.add_subplot()
    height = 0.8 / max(1, len(variants))
    for j, var in enumerate(variants):
        ys, ws, hatch = [], [], []
        for i, name in enumerate(names):
            r = by_key.get((name, var))
            if r is None:
                continue
            ys.append(i + j * height)
            ws.append(max(float(r["wall_ms"]), 1e-3))
            hatch.append(r["status"] != "OPTIMAL")
        bars = ax.barh(ys, ws, height=height, label=var)
        for b, h in zip(bars, hatch):
            if h:
                b.set_hatch("//")
    ax.set_yticks([i + 0.4 - height / 2 for i in range(len(names))])
    ax.set_yticklabels(names)
    ax.invert_yaxis()
    ax.set_xscale("log")
    ax.set_xlabel("wall time [ms]")
    ax.legend(fontsize=7, frameon=False)
    fig.tight_layout()
    fig.savefig(path, format="svg")
