"""Minimal deterministic SVG builder.

Emits plain shape elements with fixed attribute order and fixed number
formatting, no generated ids and no timestamps, so identical inputs render
byte-identical documents.
"""

from __future__ import annotations

from xml.sax.saxutils import escape


def fmt(x: float) -> str:
    """Compact fixed-precision coordinate formatting."""
    s = f"{x:.2f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


class SvgDocument:
    def __init__(self, width: float, height: float):
        self.width = width
        self.height = height
        self._parts: list[str] = []

    def line(self, x1, y1, x2, y2, stroke="#000000", width=1.0, dash: str | None = None):
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        self._parts.append(
            f'<line x1="{fmt(x1)}" y1="{fmt(y1)}" x2="{fmt(x2)}" y2="{fmt(y2)}" '
            f'stroke="{stroke}" stroke-width="{fmt(width)}"{dash_attr}/>'
        )

    def circle(self, cx, cy, r, fill="#000000", opacity: float | None = None):
        opacity_attr = f' fill-opacity="{fmt(opacity)}"' if opacity is not None else ""
        self._parts.append(
            f'<circle cx="{fmt(cx)}" cy="{fmt(cy)}" r="{fmt(r)}" '
            f'fill="{fill}"{opacity_attr}/>'
        )

    def rect(self, x, y, w, h, fill="none", stroke: str | None = None, stroke_width=1.0):
        stroke_attr = (
            f' stroke="{stroke}" stroke-width="{fmt(stroke_width)}"' if stroke else ""
        )
        self._parts.append(
            f'<rect x="{fmt(x)}" y="{fmt(y)}" width="{fmt(w)}" height="{fmt(h)}" '
            f'fill="{fill}"{stroke_attr}/>'
        )

    def polyline(self, points, stroke="#000000", width=1.5):
        if len(points) < 2:
            return
        pts = " ".join(f"{fmt(x)},{fmt(y)}" for x, y in points)
        self._parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{stroke}" '
            f'stroke-width="{fmt(width)}"/>'
        )

    def text(self, x, y, content, size=12.0, anchor="start", fill="#000000",
             rotate: float | None = None):
        transform = (
            f' transform="rotate({fmt(rotate)} {fmt(x)} {fmt(y)})"'
            if rotate is not None else ""
        )
        self._parts.append(
            f'<text x="{fmt(x)}" y="{fmt(y)}" font-family="sans-serif" '
            f'font-size="{fmt(size)}" text-anchor="{anchor}" '
            f'fill="{fill}"{transform}>{escape(content)}</text>'
        )

    def render(self) -> str:
        body = "\n".join(f"  {p}" for p in self._parts)
        return (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" '
            f'width="{fmt(self.width)}" height="{fmt(self.height)}" '
            f'viewBox="0 0 {fmt(self.width)} {fmt(self.height)}">\n'
            f"{body}\n"
            "</svg>\n"
        )

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.render())
