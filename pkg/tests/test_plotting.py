import xml.etree.ElementTree as ET

from mpp.instances import Instance
from mpp.plotting import RenderSpec, render_bench, render_polygon

from conftest import SQ3_COORDS

NS = "{http://www.w3.org/2000/svg}"


def test_polygon_svg_is_well_formed(tmp_path):
    inst = Instance.from_coords(SQ3_COORDS, "sq3")
    path = tmp_path / "sq3.svg"
    render_polygon(path, inst, (0, 1, 2, 3), [(4, 5, 6)], title="sq3")
    root = ET.parse(path).getroot()
    assert root.tag == NS + "svg"
    assert root.findall(f".//{NS}path")


def test_layers_can_be_switched_off(tmp_path):
    inst = Instance.from_coords(SQ3_COORDS, "sq3")
    full, bare = tmp_path / "full.svg", tmp_path / "bare.svg"
    render_polygon(full, inst, (0, 1, 2, 3), [(4, 5, 6)])
    render_polygon(bare, inst, (0, 1, 2, 3), [(4, 5, 6)],
                   spec=RenderSpec(show_outer=False, show_holes=False, show_points=False))
    assert bare.stat().st_size < full.stat().st_size


def test_bench_chart(tmp_path):
    rows = [{"instance": "a", "variant": "x", "status": "OPTIMAL", "wall_ms": 12.0},
            {"instance": "a", "variant": "y", "status": "TIME_LIMIT", "wall_ms": 900.0}]
    path = tmp_path / "bench.svg"
    render_bench(path, rows, ["x", "y"])
    assert ET.parse(path).getroot().tag == NS + "svg"
