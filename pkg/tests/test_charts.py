import xml.etree.ElementTree as ET

import pytest

from citypulse.aggregate import FiveNumberSummary
from citypulse.charts import HEIGHT, MARGINS, WIDTH, AffineMap, box_plot, heatmap, line_chart, scatter

NS = "{http://www.w3.org/2000/svg}"


def parse(svg):
    root = ET.fromstring(svg)
    assert root.get("viewBox") == f"0 0 {WIDTH} {HEIGHT}"
    return root


def test_affine_map_corners():
    m = AffineMap.fit([0, 10], [0, 5])
    top, right, bottom, left = MARGINS
    assert (m.x(0), m.x(10)) == (left, WIDTH - right)
    assert (m.y(0), m.y(5)) == (HEIGHT - bottom, top)
    flat = AffineMap.fit([3], [2])
    assert flat.x(3) == pytest.approx((left + WIDTH - right) / 2)
    assert AffineMap.fit([0, 1], [5, 9], y_from_zero=True).y0 == 0


def test_box_glyphs_match_summaries():
    sums = [("Mon", FiveNumberSummary.of([1, 2, 3, 4, 5])), ("Tue", None),
            ("Wed", FiveNumberSummary.of([10, 20, 30]))]
    root = parse(box_plot(sums, "weekday & volume"))
    m = AffineMap.fit([-0.5, 2.5], [1, 5, 10, 30], y_from_zero=True)
    boxes = {g.get("data-key"): g for g in root.iter(NS + "g") if g.get("class") == "box"}
    assert set(boxes) == {"Mon", "Wed"}
    for i, (label, s) in enumerate(sums):
        if s is None:
            continue
        g = boxes[label]
        rect = g.find(NS + "rect")
        assert float(rect.get("y")) == pytest.approx(m.y(s.q3), abs=0.006)
        assert float(rect.get("height")) == pytest.approx(m.y(s.q1) - m.y(s.q3), abs=0.011)
        assert float(rect.get("x")) + float(rect.get("width")) / 2 == pytest.approx(m.x(i), abs=0.011)
        lines = {ln.get("class"): ln for ln in g.iter(NS + "line")}
        assert float(lines["median"].get("y1")) == pytest.approx(m.y(s.median), abs=0.006)
        assert float(lines["whisker-low"].get("y1")) == pytest.approx(m.y(s.min), abs=0.006)
        assert float(lines["whisker-high"].get("y2")) == pytest.approx(m.y(s.max), abs=0.006)


def test_line_scatter_heatmap_parse():
    root = parse(line_chart([3, 1, 4], ["a", "b", "c"], "daily"))
    pts = [p for p in root.iter(NS + "polyline")][0].get("points").split()
    assert len(pts) == 3
    parse(line_chart([], [], "empty"))
    root = parse(scatter([(0, 1), (1, 0.5)], "users", "log posts", "log users"))
    assert len([c for c in root.iter(NS + "circle") if c.get("class") == "point"]) == 2
    root = parse(heatmap([[0.5, 0.5], [1, 0]], ["t0", "t1"], ["Mon", "Tue"], "topics"))
    cells = [r for r in root.iter(NS + "rect") if r.get("class") == "cell"]
    assert [float(c.get("data-value")) for c in cells] == [0.5, 0.5, 1, 0]


def test_charts_are_deterministic():
    s = [("x", FiveNumberSummary.of([1, 2]))]
    assert box_plot(s, "t") == box_plot(s, "t")
