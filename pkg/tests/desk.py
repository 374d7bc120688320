"""Small constructed instances on which one cut family is decisive."""

import math

from mpp.instances import Instance


def mirrored_clusters(k: int = 7, gap: float = 60.0, r: float = 10.0) -> Instance:
    # two facing half circles; without glue cuts the solver closes each
    # cluster on its own, round after round
    pts = []
    for i in range(k):
        a = math.pi / 2 + math.pi * i / (k - 1)
        pts.append((round(r * math.cos(a), 6), round(r * math.sin(a), 6)))
    pts += [(round(gap - x, 6), y) for x, y in pts]
    return Instance.from_coords(pts, "mirrored-clusters")


def nested_rings(ks=(12, 10, 6), radii=(1.0, 0.55, 0.2), phase: float = 0.2) -> Instance:
    pts = []
    for j, (k, rad) in enumerate(zip(ks, radii)):
        for i in range(k):
            a = 2 * math.pi * i / k + phase * j
            pts.append((round(100 * rad * math.cos(a), 6), round(100 * rad * math.sin(a), 6)))
    return Instance.from_coords(pts, "nested-rings")


def stranded_crescent(m: int = 9, r_in: float = 0.85, span: float = 200.0, tri: float = 5.0,
                      pos: float = 0.3) -> Instance:
    # a thick arc with a small triangle in its mouth: the triangle sits
    # outside every band cycle, far from the hull
    pts = []
    for i in range(m):
        a = math.radians(90 - span / 2 + span * i / (m - 1))
        pts.append((round(100 * math.cos(a), 6), round(100 * math.sin(a), 6)))
        pts.append((round(100 * r_in * math.cos(a), 6), round(100 * r_in * math.sin(a), 6)))
    chord_y = 100 * math.cos(math.radians(span / 2))
    cy = chord_y + pos * (100 * r_in - chord_y)
    pts += [(-tri / 2, round(cy, 6)), (tri / 2, round(cy + 0.5, 6)), (0.4, round(cy + tri, 6))]
    return Instance.from_coords(pts, "stranded-crescent")
