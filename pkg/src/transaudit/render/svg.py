"""Minimal hand-built SVG primitives with pinned formatting.

Coordinates and displayed floats are fixed to three decimals, fonts and
colors are literal attribute strings, and elements are emitted strictly
in call order, so identical inputs always produce identical bytes.
"""

from __future__ import annotations

FONT = "Helvetica, Arial, sans-serif"


def fmt(value: float) -> str:
    text = f"{value:.3f}"
    return "0.000" if text in ("-0.000",) else text


def esc(text: str) -> str:
    return (
        text.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def lerp_color(
    anchors: list[tuple[float, tuple[int, int, int]]], value: float
) -> str:
    """Linear interpolation through numerically defined color anchors."""
    if value <= anchors[0][0]:
        r, g, b = anchors[0][1]
        return f"#{r:02x}{g:02x}{b:02x}"
    for (p0, c0), (p1, c1) in zip(anchors, anchors[1:]):
        if value <= p1:
            t = 0.0 if p1 == p0 else (value - p0) / (p1 - p0)
            r = int(round(c0[0] + t * (c1[0] - c0[0])))
            g = int(round(c0[1] + t * (c1[1] - c0[1])))
            b = int(round(c0[2] + t * (c1[2] - c0[2])))
            return f"#{r:02x}{g:02x}{b:02x}"
    r, g, b = anchors[-1][1]
    return f"#{r:02x}{g:02x}{b:02x}"


#: light-to-dark blue ramp for values on a known [lo, hi] scale
SEQUENTIAL_ANCHORS = [
    (0.0, (247, 251, 255)),
    (0.5, (107, 174, 214)),
    (1.0, (8, 69, 148)),
]

#: cool-neutral-warm ramp, symmetric about zero (positive = warm)
DIVERGING_ANCHORS = [
    (-1.0, (33, 102, 172)),
    (0.0, (247, 247, 247)),
    (1.0, (178, 24, 43)),
]


def sequential_color(value: float, lo: float, hi: float) -> str:
    span = hi - lo
    t = 0.5 if span == 0 else (value - lo) / span
    return lerp_color(SEQUENTIAL_ANCHORS, max(0.0, min(1.0, t)))


def diverging_color(value: float, magnitude: float) -> str:
    t = 0.0 if magnitude == 0 else value / magnitude
    return lerp_color(DIVERGING_ANCHORS, max(-1.0, min(1.0, t)))


def text_color_for(background: str) -> str:
    r = int(background[1:3], 16)
    g = int(background[3:5], 16)
    b = int(background[5:7], 16)
    luma = 0.299 * r + 0.587 * g + 0.114 * b
    return "#000000" if luma > 140 else "#ffffff"


class SvgCanvas:
    def __init__(self, width: float, height: float):
        self.width = width
        self.height = height
        self.parts: list[str] = [
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{fmt(width)}" '
            f'height="{fmt(height)}" viewBox="0 0 {fmt(width)} {fmt(height)}">\n'
        ]

    def rect(
        self,
        x: float,
        y: float,
        w: float,
        h: float,
        fill: str,
        stroke: str | None = None,
        stroke_width: float = 1.0,
    ) -> None:
        stroke_attr = (
            "" if stroke is None else f' stroke="{stroke}" stroke-width="{fmt(stroke_width)}"'
        )
        self.parts.append(
            f'<rect x="{fmt(x)}" y="{fmt(y)}" width="{fmt(w)}" height="{fmt(h)}" '
            f'fill="{fill}"{stroke_attr}/>\n'
        )

    def line(
        self, x1: float, y1: float, x2: float, y2: float, stroke: str, width: float = 1.0
    ) -> None:
        self.parts.append(
            f'<line x1="{fmt(x1)}" y1="{fmt(y1)}" x2="{fmt(x2)}" y2="{fmt(y2)}" '
            f'stroke="{stroke}" stroke-width="{fmt(width)}"/>\n'
        )

    def circle(self, cx: float, cy: float, r: float, fill: str) -> None:
        self.parts.append(
            f'<circle cx="{fmt(cx)}" cy="{fmt(cy)}" r="{fmt(r)}" fill="{fill}"/>\n'
        )

    def text(
        self,
        x: float,
        y: float,
        content: str,
        size: float = 11.0,
        anchor: str = "start",
        fill: str = "#000000",
        weight: str | None = None,
    ) -> None:
        weight_attr = "" if weight is None else f' font-weight="{weight}"'
        self.parts.append(
            f'<text x="{fmt(x)}" y="{fmt(y)}" font-family="{FONT}" '
            f'font-size="{fmt(size)}" text-anchor="{anchor}" fill="{fill}"{weight_attr}>'
            f"{esc(content)}</text>\n"
        )

    def to_svg(self) -> str:
        return "".join(self.parts) + "</svg>\n"
