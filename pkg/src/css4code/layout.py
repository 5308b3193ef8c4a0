"""S-block layout: flatten a styled document to fragments, resolve widths
via h-gadgets, resolve heights via v-gadgets, and compute border outlines.

The document's own newlines are the only line breaks (no re-wrapping); with
no border spacing anywhere, every fragment lands exactly on the raw text
grid. Border spacing (margin + border-width + padding, each uniform on all
four sides) reserves room through gadgets:

* h-gadgets sit beside fragments on each line a subtree touches: before the
  subtree's first fragment, after its last, and at every interior line end /
  continuation line start (skipping leading whitespace).
* v-gadgets reserve vertical room above/below the subtree's outer lines;
  multiline subtrees always allocate the four segments of the s-block shape
  (degenerate segments have zero width and reserve no height).

Children allocate before parents, so inner borders nest strictly inside
outer ones. Outline geometry falls out of the same extents.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from .doc import DocNode, HtmlLeaf, StylishDoc, TextLeaf

# ---------------------------------------------------------------------------
# Font metrics: deterministic tables instead of browser measurement


@dataclass(frozen=True)
class FontMetrics:
    """Character advance tables. ``advances`` maps single characters to px
    at ``base_size``; missing characters use ``default_advance``. Fragment
    widths scale linearly with the owning node's font-size."""

    default_advance: float = 8.0
    line_height: float = 16.0
    baseline: float = 12.0
    base_size: float = 16.0
    advances: Optional[dict[str, float]] = None
    name: str = "mono"

    def advance(self, ch: str, font_size: Optional[float] = None) -> float:
        base = self.default_advance
        if self.advances is not None:
            base = self.advances.get(ch, self.default_advance)
        if font_size is None:
            return base
        return base * font_size / self.base_size

    def measure(self, text: str, font_size: Optional[float] = None) -> float:
        return sum(self.advance(ch, font_size) for ch in text)


MONO = FontMetrics()


def load_metrics_table(path: str) -> FontMetrics:
    """Load a proportional metrics table.

    Format: tab-separated lines ``<char>\t<advance-px>`` (``space`` and
    ``tab`` name those characters); ``@line_height``, ``@baseline``,
    ``@base_size`` and ``@default`` directives override the preset values.
    ``#`` starts a comment line.
    """
    advances: dict[str, float] = {}
    line_height, baseline, base_size, default = 16.0, 12.0, 16.0, 8.0
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            stripped = raw.strip("\n")
            if not stripped.strip() or stripped.lstrip().startswith("#"):
                continue
            key, _, rest = stripped.partition("\t")
            value = rest.strip()
            if key == "@line_height":
                line_height = float(value)
            elif key == "@baseline":
                baseline = float(value)
            elif key == "@base_size":
                base_size = float(value)
            elif key == "@default":
                default = float(value)
            else:
                ch = {"space": " ", "tab": "\t"}.get(key, key)
                advances[ch] = float(value)
    return FontMetrics(default, line_height, baseline, base_size, advances, "table")


def measure_fragment(text: str, styles, metrics: FontMetrics) -> float:
    """Width of a single-line run under the active metrics; the owning
    node's font-size scales advances proportionally."""
    if "\n" in text:
        raise ValueError("fragments cannot contain newlines")
    return metrics.measure(text, _font_size(styles))


def _font_size(styles) -> Optional[float]:
    for attr in styles or ():
        if attr.name == "font-size":
            return _parse_px(attr.value)
    return None


def _parse_px(value: str) -> Optional[float]:
    text = value.strip()
    if text.endswith("px"):
        text = text[:-2]
    try:
        return float(text)
    except ValueError:
        return None


# ---------------------------------------------------------------------------
# Layout structures


@dataclass
class Spacing:
    margin: float = 0.0
    border_width: float = 0.0
    padding: float = 0.0
    radius: float = 0.0
    border_color: Optional[str] = None
    background_color: Optional[str] = None

    @property
    def total(self) -> float:
        return self.margin + self.border_width + self.padding

    @property
    def draws(self) -> bool:
        return self.border_width > 0 or self.background_color is not None


def spacing_of(node: DocNode) -> Spacing:
    sp = Spacing()
    for attr in node.styles:
        px = _parse_px(attr.value)
        if attr.name == "margin" and px is not None:
            sp.margin = px
        elif attr.name == "border-width" and px is not None:
            sp.border_width = px
        elif attr.name == "padding" and px is not None:
            sp.padding = px
        elif attr.name == "border-radius" and px is not None:
            sp.radius = px
        elif attr.name == "border-color":
            sp.border_color = attr.value
        elif attr.name == "background-color":
            sp.background_color = attr.value
    return sp


@dataclass
class Band:
    """One h-gadget slice beside a fragment; owners nest inner-to-outer."""

    owner: int
    width: float
    x: float = 0.0


@dataclass
class Fragment:
    text: str
    width: float
    line: int
    owner: int  # preorder index of the owning document node
    height: float
    is_ws: bool
    html: Optional[str] = None
    x: float = 0.0
    left_bands: list[Band] = field(default_factory=list)  # innermost first
    right_bands: list[Band] = field(default_factory=list)  # innermost first

    @property
    def left_gadget_width(self) -> float:
        return sum(b.width for b in self.left_bands)

    @property
    def right_gadget_width(self) -> float:
        return sum(b.width for b in self.right_bands)

    @property
    def x_end(self) -> float:
        return self.x + self.width


@dataclass
class LayoutNode:
    index: int
    node: DocNode
    spacing: Spacing
    frag_start: int
    frag_end: int  # exclusive
    children: list["LayoutNode"] = field(default_factory=list)
    depth: int = 0


class SBlockCase(enum.Enum):
    ONE_LINE = "one-line"
    TWO_LINE_DISJOINT = "two-line-disjoint"
    MULTILINE = "multiline"


@dataclass
class VGadget:
    owner: int
    line: int
    side: str  # "above" | "below"
    x_start: float
    x_end: float
    height: float
    case: str  # h1 | h2 | h3-i .. h3-iv
    y0: float = 0.0
    y1: float = 0.0


@dataclass
class SBlockOutline:
    owner: int
    case: SBlockCase
    vertices: list[tuple[float, float]]
    radius: float
    stroke: Optional[str]
    stroke_width: float
    fill: Optional[str]
    depth: int


@dataclass
class LayoutResult:
    fragments: list[Fragment]
    root: Optional[LayoutNode]
    nodes: dict[int, LayoutNode]
    total_lines: int
    metrics: FontMetrics
    line_tops: list[float] = field(default_factory=list)
    line_heights: list[float] = field(default_factory=list)
    vgadgets: list[VGadget] = field(default_factory=list)
    outlines: list[SBlockOutline] = field(default_factory=list)
    width: float = 0.0
    height: float = 0.0

    def node_styles(self, index: int):
        return self.nodes[index].node.styles if index in self.nodes else frozenset()


# ---------------------------------------------------------------------------
# Step 1: flattening


def flatten(doc: StylishDoc, metrics: FontMetrics) -> LayoutResult:
    """Build the fragment vector (in document order, split at newlines) and
    the layout tree recording each node's contiguous fragment range."""
    fragments: list[Fragment] = []
    nodes: dict[int, LayoutNode] = {}
    counter = [-1]
    line = [0]
    any_content = [False]

    def go(d: StylishDoc, owner: int, owner_node: Optional[DocNode], depth: int) -> Optional[LayoutNode]:
        if isinstance(d, TextLeaf):
            any_content[0] = True
            styles = owner_node.styles if owner_node is not None else frozenset()
            size = _font_size(styles)
            segments = d.text.split("\n")
            for i, segment in enumerate(segments):
                if i > 0:
                    line[0] += 1
                if segment:
                    fragments.append(
                        Fragment(
                            text=segment,
                            width=metrics.measure(segment, size),
                            line=line[0],
                            owner=owner,
                            height=metrics.line_height,
                            is_ws=segment.strip() == "",
                        )
                    )
            return None
        if isinstance(d, HtmlLeaf):
            any_content[0] = True
            styles = owner_node.styles if owner_node is not None else frozenset()
            width = height = None
            for attr in styles:
                if attr.name == "width":
                    width = _parse_px(attr.value)
                elif attr.name == "height":
                    height = _parse_px(attr.value)
            fragments.append(
                Fragment(
                    text="",
                    width=width or 0.0,
                    line=line[0],
                    owner=owner,
                    height=height or metrics.line_height,
                    is_ws=False,
                    html=d.html,
                )
            )
            return None
        counter[0] += 1
        index = counter[0]
        start = len(fragments)
        lnode = LayoutNode(index, d, spacing_of(d), start, start, depth=depth)
        nodes[index] = lnode
        for child in d.children:
            sub = go(child, index, d, depth + 1)
            if sub is not None:
                lnode.children.append(sub)
        lnode.frag_end = len(fragments)
        return lnode

    root = go(doc, -1, None, 0)
    total = line[0] + 1 if (fragments or any_content[0]) else 0
    return LayoutResult(fragments, root, nodes, total, metrics)


# ---------------------------------------------------------------------------
# Step 2: width resolution


def _subtree_ids(node: LayoutNode) -> set[int]:
    ids = {node.index}
    for child in node.children:
        ids |= _subtree_ids(child)
    return ids


def _lines_of(layout: LayoutResult, node: LayoutNode, include_ws: bool = False) -> list[int]:
    seen: list[int] = []
    for f in layout.fragments[node.frag_start : node.frag_end]:
        if (include_ws or not f.is_ws) and f.line not in seen:
            seen.append(f.line)
    return sorted(seen)


def resolve_widths(layout: LayoutResult) -> None:
    """Place h-gadgets (children before parents) and assign every fragment
    its x position by summing earlier widths on its line."""

    def allocate(node: LayoutNode) -> None:
        for child in node.children:
            allocate(child)
        s = node.spacing.total
        if s <= 0 or node.frag_start >= node.frag_end:
            return
        frags = layout.fragments[node.frag_start : node.frag_end]
        lines = _lines_of(layout, node)
        if not lines:
            return
        first_line = lines[0]
        last_line = lines[-1]
        # (i) before the subtree's first fragment
        frags[0].left_bands.append(Band(node.index, s))
        # (ii) after the subtree's last fragment
        last_frag = frags[-1]
        for f in reversed(frags):
            if not f.is_ws or f is frags[0]:
                last_frag = f
                break
        last_frag.right_bands.append(Band(node.index, s))
        for ln in lines:
            on_line = [f for f in frags if f.line == ln and not f.is_ws]
            if not on_line:
                continue
            # (iv) before the first non-whitespace fragment of a new line
            if ln != first_line and on_line[0] is not frags[0]:
                on_line[0].left_bands.append(Band(node.index, s))
            # (iii) after the last fragment of each interior line end
            if ln != last_line and on_line[-1] is not last_frag:
                on_line[-1].right_bands.append(Band(node.index, s))

    if layout.root is not None:
        allocate(layout.root)

    by_line: dict[int, list[Fragment]] = {}
    for f in layout.fragments:
        by_line.setdefault(f.line, []).append(f)
    width = 0.0
    for ln in sorted(by_line):
        x = 0.0
        for f in by_line[ln]:
            for band in reversed(f.left_bands):  # outermost first
                band.x = x
                x += band.width
            f.x = x
            x += f.width
            for band in f.right_bands:  # innermost first
                band.x = x
                x += band.width
        width = max(width, x)
    layout.width = width


# ---------------------------------------------------------------------------
# Step 3: height resolution


def _line_extent(
    layout: LayoutResult, node: LayoutNode, ids: set[int], ln: int
) -> Optional[tuple[float, float]]:
    """Horizontal extent of a subtree on one line: its non-whitespace content
    plus every gadget band owned within the subtree."""
    lo: Optional[float] = None
    hi: Optional[float] = None

    def cover(a: float, b: float) -> None:
        nonlocal lo, hi
        lo = a if lo is None else min(lo, a)
        hi = b if hi is None else max(hi, b)

    for f in layout.fragments[node.frag_start : node.frag_end]:
        if f.line != ln:
            continue
        if not f.is_ws:
            cover(f.x, f.x_end)
        for band in f.left_bands + f.right_bands:
            if band.owner in ids:
                cover(band.x, band.x + band.width)
    if lo is None or hi is None:
        return None
    return lo, hi


def classify_sblock(layout: LayoutResult, node: LayoutNode) -> SBlockCase:
    """One of the three s-block shapes: all on one line; exactly two lines
    whose parts do not overlap horizontally (the second ends before the
    first begins); anything else is multiline."""
    lines = _lines_of(layout, node)
    if len(lines) <= 1:
        return SBlockCase.ONE_LINE
    if len(lines) == 2:
        ids = _subtree_ids(node)
        first = _line_extent(layout, node, ids, lines[0])
        second = _line_extent(layout, node, ids, lines[1])
        if first and second and second[1] <= first[0]:
            return SBlockCase.TWO_LINE_DISJOINT
    return SBlockCase.MULTILINE


def resolve_heights(layout: LayoutResult) -> None:
    """Allocate v-gadgets depth-first (children before parents), stack them
    into line offsets, and derive each decorated subtree's outline."""
    above: dict[int, list[VGadget]] = {}
    below: dict[int, list[VGadget]] = {}
    plans: list[tuple[LayoutNode, SBlockCase, list[VGadget]]] = []

    def push(stack: dict[int, list[VGadget]], gadget: VGadget) -> None:
        stack.setdefault(gadget.line, []).append(gadget)

    def allocate(node: LayoutNode) -> None:
        for child in node.children:
            allocate(child)
        sp = node.spacing
        if (sp.total <= 0 and not sp.draws) or node.frag_start >= node.frag_end:
            return
        lines = _lines_of(layout, node)
        if not lines:
            return
        ids = _subtree_ids(node)
        s = sp.total
        case = classify_sblock(layout, node)
        gadgets: list[VGadget] = []

        def seg(side: str, ln: int, x0: float, x1: float, tag: str) -> VGadget:
            height = s if x1 > x0 else 0.0
            g = VGadget(node.index, ln, side, x0, x1, height, tag)
            push(above if side == "above" else below, g)
            gadgets.append(g)
            return g

        extents = {ln: _line_extent(layout, node, ids, ln) for ln in lines}
        known = {ln: e for ln, e in extents.items() if e is not None}
        if case is SBlockCase.ONE_LINE:
            ln = lines[0]
            x0, x1 = known[ln]
            seg("above", ln, x0, x1, "h1")
            seg("below", ln, x0, x1, "h1")
        elif case is SBlockCase.TWO_LINE_DISJOINT:
            for ln in lines:
                x0, x1 = known[ln]
                seg("above", ln, x0, x1, "h2")
                seg("below", ln, x0, x1, "h2")
        else:
            first, last = lines[0], lines[-1]
            x_min = min(e[0] for e in known.values())
            x_max = max(e[1] for e in known.values())
            x_fl = known[first][0]
            x_ll = known[last][1]
            seg("above", first, x_fl, x_max, "h3-i")
            seg("above", lines[1], x_min, x_fl, "h3-ii")
            seg("below", last, x_min, x_ll, "h3-iii")
            seg("below", lines[-2], x_ll, x_max, "h3-iv")
        plans.append((node, case, gadgets))

    if layout.root is not None:
        allocate(layout.root)

    # Stack gadget heights into line positions; first-allocated (innermost)
    # gadgets sit nearest their line.
    line_tops: list[float] = []
    line_heights: list[float] = []
    by_line: dict[int, list[Fragment]] = {}
    for f in layout.fragments:
        by_line.setdefault(f.line, []).append(f)
    y = 0.0
    for ln in range(layout.total_lines):
        stack_above = above.get(ln, [])
        y += sum(g.height for g in stack_above)
        line_tops.append(y)
        offset = 0.0
        for g in stack_above:  # innermost first, growing upward
            g.y1 = y - offset
            g.y0 = g.y1 - g.height
            offset += g.height
        height = max(
            [f.height for f in by_line.get(ln, [])] + [layout.metrics.line_height]
        )
        line_heights.append(height)
        y += height
        offset = 0.0
        for g in below.get(ln, []):  # innermost first, growing downward
            g.y0 = y + offset
            g.y1 = g.y0 + g.height
            offset += g.height
        y += sum(g.height for g in below.get(ln, []))
    layout.line_tops = line_tops
    layout.line_heights = line_heights
    layout.height = y
    layout.vgadgets = [g for _n, _c, gs in plans for g in gs]

    # Outline geometry: edges sit on the border centerline, inset from the
    # gadget bands by margin + border-width/2.
    outlines: list[SBlockOutline] = []
    for node, case, gadgets in plans:
        sp = node.spacing
        if not sp.draws:
            continue
        inset = sp.margin + sp.border_width / 2.0
        gm = {}
        for g in gadgets:
            gm.setdefault((g.side, g.case), g)

        def rect(gtop: VGadget, gbot: VGadget, x0: float, x1: float) -> list[tuple[float, float]]:
            top = gtop.y0 + inset
            bottom = gbot.y1 - inset
            return [(x0 + inset, top), (x1 - inset, top), (x1 - inset, bottom), (x0 + inset, bottom)]

        if case is SBlockCase.ONE_LINE:
            g_top = gm[("above", "h1")]
            g_bot = gm[("below", "h1")]
            outlines.append(
                SBlockOutline(
                    node.index,
                    case,
                    rect(g_top, g_bot, g_top.x_start, g_top.x_end),
                    sp.radius,
                    sp.border_color,
                    sp.border_width,
                    sp.background_color,
                    node.depth,
                )
            )
        elif case is SBlockCase.TWO_LINE_DISJOINT:
            pairs: dict[int, dict[str, VGadget]] = {}
            for g in gadgets:
                pairs.setdefault(g.line, {})[g.side] = g
            for ln in sorted(pairs):
                g_top = pairs[ln]["above"]
                g_bot = pairs[ln]["below"]
                outlines.append(
                    SBlockOutline(
                        node.index,
                        case,
                        rect(g_top, g_bot, g_top.x_start, g_top.x_end),
                        sp.radius,
                        sp.border_color,
                        sp.border_width,
                        sp.background_color,
                        node.depth,
                    )
                )
        else:
            g_i = gm[("above", "h3-i")]
            g_ii = gm[("above", "h3-ii")]
            g_iii = gm[("below", "h3-iii")]
            g_iv = gm[("below", "h3-iv")]
            x_fl = g_i.x_start + inset
            x_max = g_i.x_end - inset
            x_min = g_iii.x_start + inset
            x_ll = g_iii.x_end - inset
            y_top = g_i.y0 + inset
            y_bottom = g_iii.y1 - inset
            verts: list[tuple[float, float]] = [(x_fl, y_top), (x_max, y_top)]
            if g_iv.height > 0:  # bottom-right corner is missing
                y_step = g_iv.y1 - inset
                verts += [(x_max, y_step), (x_ll, y_step)]
            verts += [(x_ll, y_bottom), (x_min, y_bottom)]
            if g_ii.height > 0:  # top-left corner is missing
                y_step = g_ii.y0 + inset
                verts += [(x_min, y_step), (x_fl, y_step)]
            outlines.append(
                SBlockOutline(
                    node.index,
                    case,
                    verts,
                    sp.radius,
                    sp.border_color,
                    sp.border_width,
                    sp.background_color,
                    node.depth,
                )
            )
    # Parents paint before children: sort by depth, then document order.
    outlines.sort(key=lambda o: (o.depth, o.owner))
    layout.outlines = outlines


def layout_doc(doc: StylishDoc, metrics: FontMetrics) -> LayoutResult:
    """Full pipeline: flatten, resolve widths, resolve heights."""
    layout = flatten(doc, metrics)
    resolve_widths(layout)
    resolve_heights(layout)
    return layout


def layout_to_json(layout: LayoutResult) -> dict:
    return {
        "width": round(layout.width, 2),
        "height": round(layout.height, 2),
        "total_lines": layout.total_lines,
        "fragments": [
            {
                "text": f.text,
                "x": round(f.x, 2),
                "y": round(layout.line_tops[f.line], 2) if layout.line_tops else 0.0,
                "w": round(f.width, 2),
                "h": round(f.height, 2),
                "line": f.line,
                "owner": f.owner,
                **({"html": f.html} if f.html is not None else {}),
            }
            for f in layout.fragments
        ],
        "vgadgets": [
            {
                "owner": g.owner,
                "line": g.line,
                "side": g.side,
                "x0": round(g.x_start, 2),
                "x1": round(g.x_end, 2),
                "height": round(g.height, 2),
                "case": g.case,
            }
            for g in layout.vgadgets
        ],
        "outlines": [
            {
                "owner": o.owner,
                "case": o.case.value,
                "path": [[round(x, 2), round(y, 2)] for x, y in o.vertices],
                "radius": o.radius,
                "stroke": o.stroke,
                "stroke_width": o.stroke_width,
                "fill": o.fill,
            }
            for o in layout.outlines
        ],
    }
