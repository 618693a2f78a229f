"""Static SVG charts written as plain markup.

Every chart uses an 800x500 viewBox with the plot area inset by
``MARGINS`` (top, right, bottom, left). Data values map to pixels through
:class:`AffineMap`::

    px = left + (x - x0) / (x1 - x0) * (800 - left - right)
    py = 500 - bottom - (y - y0) / (y1 - y0) * (500 - top - bottom)

Coordinates are written with two decimals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape, quoteattr

WIDTH, HEIGHT = 800, 500
MARGINS = (30, 20, 50, 70)  # top, right, bottom, left
WEEKDAYS = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")


def fmt(v: float) -> str:
    return f"{v:.2f}"


@dataclass(frozen=True)
class AffineMap:
    x0: float
    x1: float
    y0: float
    y1: float

    @classmethod
    def fit(cls, xs: Sequence[float], ys: Sequence[float], y_from_zero: bool = False) -> "AffineMap":
        x0, x1 = (min(xs), max(xs)) if xs else (0.0, 1.0)
        y0, y1 = (min(ys), max(ys)) if ys else (0.0, 1.0)
        if y_from_zero:
            y0 = min(0.0, y0)
        if x0 == x1:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y0 == y1:
            y0, y1 = y0 - 0.5, y1 + 0.5
        return cls(float(x0), float(x1), float(y0), float(y1))

    def x(self, v: float) -> float:
        top, right, bottom, left = MARGINS
        return left + (v - self.x0) / (self.x1 - self.x0) * (WIDTH - left - right)

    def y(self, v: float) -> float:
        top, right, bottom, left = MARGINS
        return HEIGHT - bottom - (v - self.y0) / (self.y1 - self.y0) * (HEIGHT - top - bottom)


class _Svg:
    def __init__(self, title: str):
        self.parts: List[str] = [
            f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
            f'width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">',
            f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2:.2f}" y="20.00" text-anchor="middle" font-size="14">{escape(title)}</text>',
        ]

    def add(self, s: str):
        self.parts.append(s)

    def text(self, x, y, s, anchor="middle", **attrs):
        extra = "".join(f" {k.replace('_', '-')}={quoteattr(str(v))}" for k, v in attrs.items())
        self.add(f'<text x="{fmt(x)}" y="{fmt(y)}" text-anchor="{anchor}"{extra}>{escape(str(s))}</text>')

    def line(self, x1, y1, x2, y2, cls="", stroke="black"):
        c = f' class="{cls}"' if cls else ""
        self.add(f'<line{c} x1="{fmt(x1)}" y1="{fmt(y1)}" x2="{fmt(x2)}" y2="{fmt(y2)}" stroke="{stroke}"/>')

    def axes(self, m: AffineMap, y_ticks: int = 5):
        self.line(m.x(m.x0), m.y(m.y0), m.x(m.x1), m.y(m.y0), "axis")
        self.line(m.x(m.x0), m.y(m.y0), m.x(m.x0), m.y(m.y1), "axis")
        for i in range(y_ticks + 1):
            v = m.y0 + (m.y1 - m.y0) * i / y_ticks
            self.text(m.x(m.x0) - 6, m.y(v) + 4, f"{v:g}", anchor="end")

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def line_chart(values: Sequence[float], labels: Sequence[str], title: str) -> str:
    """Series over positions 0..n-1, e.g. daily volume; every ~10th label drawn."""
    svg = _Svg(title)
    xs = list(range(len(values)))
    m = AffineMap.fit(xs, list(values), y_from_zero=True)
    svg.axes(m)
    if values:
        pts = " ".join(f"{fmt(m.x(i))},{fmt(m.y(v))}" for i, v in zip(xs, values))
        svg.add(f'<polyline class="series" points="{pts}" fill="none" stroke="steelblue"/>')
        step = max(1, len(values) // 10)
        for i in range(0, len(values), step):
            svg.text(m.x(i), HEIGHT - MARGINS[2] + 16, labels[i])
    return svg.render()


def box_plot(summaries: Sequence[Tuple[str, Optional[object]]], title: str) -> str:
    """One box per category at x = index; the box spans q1..q3, whiskers min..max.

    Each glyph group carries ``data-key`` with the category label.
    """
    svg = _Svg(title)
    n = len(summaries)
    ys = [v for _, s in summaries if s is not None for v in (s.min, s.max)]
    m = AffineMap.fit([-0.5, n - 0.5], ys, y_from_zero=True)
    svg.axes(m)
    half = 0.3 * (m.x(1) - m.x(0)) if n else 0
    for i, (label, s) in enumerate(summaries):
        cx = m.x(i)
        svg.text(cx, HEIGHT - MARGINS[2] + 16, label)
        if s is None:
            continue
        svg.add(f'<g class="box" data-key={quoteattr(str(label))}>')
        svg.line(cx, m.y(s.min), cx, m.y(s.q1), "whisker-low")
        svg.line(cx, m.y(s.q3), cx, m.y(s.max), "whisker-high")
        svg.add(f'<rect x="{fmt(cx - half)}" y="{fmt(m.y(s.q3))}" width="{fmt(2 * half)}" '
                f'height="{fmt(m.y(s.q1) - m.y(s.q3))}" fill="lightsteelblue" stroke="black"/>')
        svg.line(cx - half, m.y(s.median), cx + half, m.y(s.median), "median", "darkred")
        svg.add("</g>")
    return svg.render()


def scatter(points: Sequence[Tuple[float, float]], title: str, xlabel: str = "", ylabel: str = "") -> str:
    svg = _Svg(title)
    m = AffineMap.fit([p[0] for p in points], [p[1] for p in points])
    svg.axes(m)
    for x, y in points:
        svg.add(f'<circle class="point" cx="{fmt(m.x(x))}" cy="{fmt(m.y(y))}" r="3" fill="steelblue"/>')
    if xlabel:
        svg.text(WIDTH / 2, HEIGHT - 10, xlabel)
    if ylabel:
        svg.text(16, HEIGHT / 2, ylabel, transform=f"rotate(-90 16 {HEIGHT / 2:.2f})")
    return svg.render()


def heatmap(matrix: Sequence[Sequence[float]], row_labels: Sequence[str], col_labels: Sequence[str],
            title: str) -> str:
    """Cells shaded by value relative to the matrix maximum."""
    svg = _Svg(title)
    top, right, bottom, left = MARGINS
    rows = len(matrix)
    cols = len(col_labels)
    peak = max((v for row in matrix for v in row), default=0.0) or 1.0
    cw = (WIDTH - left - right) / max(cols, 1)
    ch = (HEIGHT - top - bottom) / max(rows, 1)
    for r, row in enumerate(matrix):
        svg.text(left - 6, top + (r + 0.5) * ch + 4, row_labels[r], anchor="end")
        for c, v in enumerate(row):
            shade = int(round(255 * (1 - v / peak)))
            svg.add(f'<rect class="cell" x="{fmt(left + c * cw)}" y="{fmt(top + r * ch)}" width="{fmt(cw)}" '
                    f'height="{fmt(ch)}" fill="rgb({shade},{shade},255)" data-value="{v:.6f}"/>')
    for c, label in enumerate(col_labels):
        svg.text(left + (c + 0.5) * cw, HEIGHT - bottom + 16, label)
    return svg.render()
