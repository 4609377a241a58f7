import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from mmfsseq.algebra import Window
from mmfsseq.chart import (
    ChartClass,
    ChartError,
    ChartScene,
    ChartStyle,
    layout_classes,
    layout_page,
    render_svg,
)
from mmfsseq.grading import TriDegree, parse_expression
from mmfsseq.mmfdata import load_dataset

GOLDEN = Path(__file__).parent / "golden"
NS = "{http://www.w3.org/2000/svg}"


@pytest.fixture(scope="module")
def data():
    return load_dataset()


def circles(svg):
    return ET.fromstring(svg).iter(f"{NS}circle")


@pytest.mark.parametrize("key, name", [("2", "e2.svg"), ("inf", "einf.svg")])
def test_golden(data, key, name):
    svg = render_svg(layout_page(data, key))
    assert svg.encode("utf-8") == (GOLDEN / name).read_bytes()


@pytest.mark.parametrize("key", ["2", "3", "4", "inf"])
def test_svg_is_well_formed_and_counts_dots(data, key):
    scene = layout_page(data, key)
    svg = render_svg(scene)
    root = ET.fromstring(svg)
    assert root.tag == f"{NS}svg"
    assert len(list(circles(svg))) == len(scene.dots)
    assert root.find(f".//{NS}g[@id='legend']") is not None


def test_stem_zero_einf(data):
    scene = layout_page(data, "inf", Window(s_max=0))
    assert [d.label for d in scene.dots] == ["h_0"]
    assert len(list(circles(render_svg(scene)))) == 1


def test_deterministic(data):
    a = render_svg(layout_page(data, "inf"))
    b = render_svg(layout_page(load_dataset(), "inf"))
    assert a == b


def test_dots_inside_window(data):
    w = Window(s_max=40, f_max=8, s_min=10)
    scene = layout_page(data, "4", w)
    assert scene.dots and all(w.contains(TriDegree(d.s, d.f, d.w)) for d in scene.dots)
    idx = scene.dot_index()
    for seg in scene.segments:
        assert seg.start in idx and seg.end in idx


def test_partial_flag(data):
    # the E2 relations are complete only in very low stems
    assert layout_page(data, "2").partial
    assert not layout_page(data, "2", Window(s_max=2)).partial


def test_empty_scene():
    scene = ChartScene(Window(s_max=0), [], [])
    svg = render_svg(scene)
    assert len(list(circles(svg))) == 0
    ET.fromstring(svg)


def test_unknown_torsion_order_raises():
    style = ChartStyle(dot_colors={None: "black"})
    x = parse_expression("h_1")
    classes = [ChartClass(x, TriDegree(1, 1, 1), "h_1")]
    with pytest.raises(ChartError):
        render_svg(layout_classes(classes, Window(s_max=5), style, lambda e: (7, True)), style)
    ok = layout_classes(classes, Window(s_max=5), style, lambda e: (None, True))
    assert len(list(circles(render_svg(ok, style)))) == 1


def test_tau_power_differential_without_legend_color(data):
    # d_3(Delta^4) = tau^8 n g^4 and the legend has no color for order 8
    scene = layout_page(data, "3", Window(s_max=100))
    segs = [g for g in scene.segments if g.kind == "differential" and g.note == "tau^8"]
    assert len(segs) == 1 and segs[0].color == ChartStyle().differential_color
    assert [g.color for g in scene.segments if g.note == "tau^3"] == [data.legend()[3]]
