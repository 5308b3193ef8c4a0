"""Emit a standalone HTML document: absolutely positioned text fragments
atop an SVG layer carrying s-block backgrounds and borders.

Output is deterministic byte-for-byte: fixed attribute order, two-decimal
fixed-point coordinates, styles sorted by name.
"""

from __future__ import annotations

import html as html_mod
from dataclasses import dataclass

from .layout import LayoutResult, SBlockOutline

# Style attributes forwarded onto fragment spans; border spacing is consumed
# by layout and must not also be interpreted by the browser.
_PASS_THROUGH = (
    "color",
    "font-family",
    "font-size",
    "font-weight",
    "font-style",
    "text-decoration",
    "opacity",
)


@dataclass(frozen=True)
class RenderOutput:
    html: str
    width: float
    height: float


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def svg_path_of(outline: SBlockOutline) -> str:
    """Closed path through the outline's vertices; corners become
    quarter-circle arcs when the radius is positive, clamped to half the
    shorter adjacent edge."""
    verts = outline.vertices
    n = len(verts)
    if n < 3:
        return ""
    radius = outline.radius
    if radius <= 0:
        cmds = [f"M {_fmt(verts[0][0])} {_fmt(verts[0][1])}"]
        cmds += [f"L {_fmt(x)} {_fmt(y)}" for x, y in verts[1:]]
        cmds.append("Z")
        return " ".join(cmds)

    def unit(dx: float, dy: float) -> tuple[float, float]:
        length = (dx * dx + dy * dy) ** 0.5 or 1.0
        return dx / length, dy / length

    cmds = []
    points = []
    for i in range(n):
        prev = verts[(i - 1) % n]
        cur = verts[i]
        nxt = verts[(i + 1) % n]
        din = unit(cur[0] - prev[0], cur[1] - prev[1])
        dout = unit(nxt[0] - cur[0], nxt[1] - cur[1])
        len_in = abs(cur[0] - prev[0]) + abs(cur[1] - prev[1])
        len_out = abs(nxt[0] - cur[0]) + abs(nxt[1] - cur[1])
        r = min(radius, len_in / 2.0, len_out / 2.0)
        enter = (cur[0] - din[0] * r, cur[1] - din[1] * r)
        leave = (cur[0] + dout[0] * r, cur[1] + dout[1] * r)
        # cross > 0 turns clockwise in screen coordinates (y grows down)
        cross = din[0] * dout[1] - din[1] * dout[0]
        sweep = 1 if cross > 0 else 0
        points.append((enter, leave, r, sweep))
    first_enter = points[0][0]
    cmds.append(f"M {_fmt(first_enter[0])} {_fmt(first_enter[1])}")
    for i in range(n):
        enter, leave, r, sweep = points[i]
        if r > 0:
            cmds.append(f"A {_fmt(r)} {_fmt(r)} 0 0 {sweep} {_fmt(leave[0])} {_fmt(leave[1])}")
        next_enter = points[(i + 1) % n][0]
        cmds.append(f"L {_fmt(next_enter[0])} {_fmt(next_enter[1])}")
    cmds.append("Z")
    return " ".join(cmds)


def _span_style(layout: LayoutResult, frag_owner: int, x: float, y: float) -> str:
    parts = [f"left:{_fmt(x)}px", f"top:{_fmt(y)}px"]
    styles = sorted(layout.node_styles(frag_owner), key=lambda a: a.name)
    for attr in styles:
        if attr.name in _PASS_THROUGH:
            parts.append(f"{attr.name}:{attr.value}")
    return ";".join(parts)


_PAGE_CSS = """\
body { margin: 0; }
.c4c-canvas { position: relative; font-family: monospace; font-size: 16px; }
.c4c-canvas svg { position: absolute; left: 0; top: 0; }
.c4c-frag { position: absolute; white-space: pre; display: inline-block; }
.c4c-html { position: absolute; }
"""


def emit(layout: LayoutResult, title: str = "css4code") -> RenderOutput:
    """Serialize a resolved layout. SVG outlines paint beneath the text,
    parents before children so inner blocks overlay outer ones; HTML leaf
    payloads are inlined verbatim (trusted passthrough)."""
    width = layout.width
    height = layout.height
    lh = layout.metrics.line_height

    svg_parts = []
    for outline in layout.outlines:
        d = svg_path_of(outline)
        if not d:
            continue
        fill = outline.fill if outline.fill is not None else "none"
        stroke = outline.stroke if outline.stroke is not None else "black"
        stroke_attr = (
            f' stroke="{_escape_attr(stroke)}" stroke-width="{_fmt(outline.stroke_width)}"'
            if outline.stroke_width > 0
            else ""
        )
        svg_parts.append(f'<path d="{d}" fill="{_escape_attr(fill)}"{stroke_attr}/>')
    svg = (
        f'<svg width="{_fmt(width)}" height="{_fmt(height)}" '
        f'viewBox="0 0 {_fmt(width)} {_fmt(height)}">' + "".join(svg_parts) + "</svg>"
    )

    frag_parts = []
    for f in layout.fragments:
        y = layout.line_tops[f.line] if layout.line_tops else 0.0
        if f.html is not None:
            style = f"left:{_fmt(f.x)}px;top:{_fmt(y)}px"
            frag_parts.append(f'<div class="c4c-html" style="{style}">{f.html}</div>')
            continue
        style = _span_style(layout, f.owner, f.x, y)
        text = html_mod.escape(f.text, quote=False)
        frag_parts.append(
            f'<span class="c4c-frag" style="{style};line-height:{_fmt(lh)}px">{text}</span>'
        )

    doc = (
        "<!DOCTYPE html>\n"
        '<html><head><meta charset="utf-8">'
        f"<title>{html_mod.escape(title)}</title>"
        f"<style>{_PAGE_CSS}</style></head>\n"
        f'<body><div class="c4c-canvas" '
        f'style="width:{_fmt(width)}px;height:{_fmt(height)}px">\n'
        + svg
        + "\n"
        + "\n".join(frag_parts)
        + "\n</div></body></html>\n"
    )
    return RenderOutput(doc, width, height)


def _escape_attr(value: str) -> str:
    return html_mod.escape(value, quote=True)
