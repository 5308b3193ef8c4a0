from __future__ import annotations

from pathlib import Path

import pytest

from css4code.doc import DocNode, HtmlLeaf, StyleAttr, TextLeaf, node, text_content
from css4code.layout import (
    MONO,
    SBlockCase,
    classify_sblock,
    flatten,
    layout_doc,
    load_metrics_table,
    measure_fragment,
    resolve_heights,
    resolve_widths,
)
from css4code.pipeline import render_code
from css4code.tiny import parse_tiny, value_of, view_tiny
from css4code.engine import apply_stylesheet
from css4code import sheet as S
from css4code.tiny import TINY_REGISTRY

DATA = Path(__file__).parent / "data"

SPACED = [
    StyleAttr("border-width", "2"),
    StyleAttr("padding", "2"),
    StyleAttr("margin", "2"),
]


def styled_doc(source: str, sheet: str):
    program = parse_tiny(source)
    root = value_of(program.root)
    parsed = S.parse_stylesheet(sheet)
    assert parsed.ok, parsed.diagnostics
    rules = S.desugar_sheet(parsed.rules)
    return apply_stylesheet(rules, view_tiny(program), root, TINY_REGISTRY).doc


# -- measurement ---------------------------------------------------------------


def test_measure_fragment():
    assert measure_fragment("", frozenset(), MONO) == 0
    assert measure_fragment("abcd", frozenset(), MONO) == 32  # 4 x 8px
    scaled = measure_fragment("ab", frozenset({StyleAttr("font-size", "32px")}), MONO)
    assert scaled == 32  # 2 x 8px x 32/16
    with pytest.raises(ValueError):
        measure_fragment("a\nb", frozenset(), MONO)


def test_metrics_table_loading(tmp_path):
    table = tmp_path / "serif.tsv"
    table.write_text(
        "# toy proportional font\n"
        "@line_height\t18\n@baseline\t14\n@default\t7\n"
        "f\t5\ni\t3\nl\t3\nt\t4\ne\t6\nr\t6\nspace\t4\n",
        "utf-8",
    )
    metrics = load_metrics_table(str(table))
    assert metrics.line_height == 18
    assert measure_fragment("filter", frozenset(), metrics) == 5 + 3 + 3 + 4 + 6 + 6
    assert metrics.advance(" ") == 4
    assert metrics.advance("z") == 7  # default


# -- flattening ----------------------------------------------------------------


def test_flatten_splits_newlines():
    doc = node(TextLeaf("ab\ncd"), path=())
    layout = flatten(doc, MONO)
    assert [(f.text, f.line) for f in layout.fragments] == [("ab", 0), ("cd", 1)]
    assert layout.total_lines == 2


def test_flatten_empty_doc():
    layout = flatten(node(path=()), MONO)
    assert layout.fragments == [] and layout.total_lines == 0
    resolve_widths(layout)
    resolve_heights(layout)
    assert layout.width == 0 and layout.height == 0


def test_flatten_tally_doc_groups():
    from tally_view import tally_doc, tally_value

    layout = flatten(tally_doc(tally_value()), MONO)
    # 4 numbers and 4 tally runs, in document order
    content = [f.text for f in layout.fragments if f.text.strip() and not f.text.startswith(("L", "R", ","))]
    assert content == ["1", "|", "2", "||", "3", "|||", "4", "||||"]


def test_flatten_ranges_are_contiguous_and_nested():
    doc = styled_doc("f = 1 + 2\ng = f 3\n", "x@EInt(_) -> x { color: teal; }")
    layout = flatten(doc, MONO)

    def check(lnode):
        assert lnode.frag_start <= lnode.frag_end
        pos = lnode.frag_start
        for child in lnode.children:
            assert child.frag_start >= pos
            assert child.frag_end <= lnode.frag_end
            pos = child.frag_end
        for child in lnode.children:
            check(child)

    check(layout.root)


def test_content_preservation_through_layout():
    source = (DATA / "roundtrip" / "30_kitchen_sink.tiny").read_text("utf-8")
    doc = styled_doc(source, "x@EBinop(_, _, _) -> x { border-width: 2; padding: 2; margin: 2; }")
    layout = layout_doc(doc, MONO)
    lines = [""] * layout.total_lines
    for f in layout.fragments:
        lines[f.line] += f.text
    assert "\n".join(lines) == text_content(doc)


def test_html_leaf_fragment():
    doc = node(
        TextLeaf("a"),
        node(HtmlLeaf("<table></table>"), styles=[StyleAttr("width", "40"), StyleAttr("height", "30")]),
        TextLeaf("b"),
        path=(),
    )
    layout = layout_doc(doc, MONO)
    html_frag = [f for f in layout.fragments if f.html is not None][0]
    assert html_frag.width == 40 and html_frag.height == 30
    b = [f for f in layout.fragments if f.text == "b"][0]
    assert b.x == 8 + 40
    # a taller html fragment raises its line's height
    assert layout.line_heights[0] == 30


# -- width resolution ------------------------------------------------------------


def test_zero_spacing_grid_identity():
    source = (DATA / "roundtrip" / "04_multiline_chain.tiny").read_text("utf-8")
    doc = styled_doc(source, "y@EInt(_) -> y { color: teal; }")
    layout = layout_doc(doc, MONO)
    grid = _grid_positions(text_content(doc))
    for f in layout.fragments:
        assert (f.x, layout.line_tops[f.line]) == grid[_frag_key(f, layout)]


def _frag_key(f, layout):
    return (f.line, f.text, round(f.x, 3))


def _grid_positions(source: str):
    # expected positions from raw character columns
    positions = {}
    for line_no, line in enumerate(source.split("\n")):
        col = 0
        # any split of the line into fragments must start at 8px * start col;
        # record prefix offsets for every suffix of the line
        for start in range(len(line) + 1):
            positions[(line_no, start)] = (start * 8.0, line_no * 16.0)
    return _GridLookup(positions)


class _GridLookup:
    def __init__(self, positions):
        self.positions = positions

    def __getitem__(self, key):
        line, text, x = key
        start_col = int(round(x / 8.0))
        return self.positions[(line, start_col)]


def test_single_line_gadget_shifts():
    # one spaced node on one line: first fragment moves by the left gadget,
    # the following sibling by both gadgets
    inner = node(TextLeaf("ab"), path=(1,), styles=SPACED)
    doc = node(inner, TextLeaf("cd"), path=())
    layout = layout_doc(doc, MONO)
    ab = next(f for f in layout.fragments if f.text == "ab")
    cd = next(f for f in layout.fragments if f.text == "cd")
    assert ab.x == 6.0  # margin+border+padding
    assert cd.x == 6.0 + 16.0 + 6.0


def test_two_line_subtree_gadget_cases():
    # inner node spans a line break: gadgets appear at the break (iii/iv)
    inner = node(TextLeaf("aa\nbb"), path=(1,), styles=SPACED)
    doc = node(TextLeaf("> "), inner, TextLeaf(" <"), path=())
    layout = layout_doc(doc, MONO)
    aa = next(f for f in layout.fragments if f.text == "aa")
    bb = next(f for f in layout.fragments if f.text == "bb")
    assert aa.left_gadget_width == 6.0  # case (i)
    assert aa.right_gadget_width == 6.0  # case (iii): interior line end
    assert bb.left_gadget_width == 6.0  # case (iv): continuation line start
    assert bb.right_gadget_width == 6.0  # case (ii): last fragment
    assert aa.x == 16.0 + 6.0
    assert bb.x == 6.0


def test_continuation_line_skips_leading_whitespace():
    # indentation arrives as its own whitespace leaf, like the Tiny view
    inner = node(TextLeaf("aa\n   "), TextLeaf("bb"), path=(1,), styles=SPACED)
    doc = node(inner, path=())
    layout = layout_doc(doc, MONO)
    ws = next(f for f in layout.fragments if f.is_ws)
    bb = next(f for f in layout.fragments if f.text == "bb")
    assert ws.x == 0.0  # indentation stays outside the block
    assert ws.left_gadget_width == 0.0
    assert bb.left_gadget_width == 6.0


def test_nested_one_line_blocks_nest_strictly():
    inner = node(TextLeaf("x"), path=(1, 1), styles=SPACED)
    outer = node(inner, path=(1,), styles=SPACED)
    doc = node(outer, path=())
    layout = layout_doc(doc, MONO)
    assert len(layout.outlines) == 2
    out_a = next(o for o in layout.outlines if o.owner == 1)
    out_b = next(o for o in layout.outlines if o.owner == 2)
    ax = [p[0] for p in out_a.vertices]
    bx = [p[0] for p in out_b.vertices]
    ay = [p[1] for p in out_a.vertices]
    by = [p[1] for p in out_b.vertices]
    assert min(bx) - min(ax) >= 2 and max(ax) - max(bx) >= 2
    assert min(by) - min(ay) >= 2 and max(ay) - max(by) >= 2


# -- height resolution / classification ------------------------------------------


def test_classify_one_line():
    doc = node(node(TextLeaf("abc"), path=(1,), styles=SPACED), path=())
    layout = layout_doc(doc, MONO)
    assert classify_sblock(layout, layout.nodes[1]) is SBlockCase.ONE_LINE


def test_classify_two_line_disjoint_and_multiline():
    # the second line's part extends past the first line's start: overlap
    doc = styled_doc(
        "bar = 1 +\n  200 + 300\n", "x@EBinop(_, _, _) -> x { padding: 2; }"
    )
    layout = layout_doc(doc, MONO)
    binop = next(n for n in layout.nodes.values() if n.node.path == (1, 3))
    assert classify_sblock(layout, binop) is SBlockCase.MULTILINE

    # short second part ending before the first part begins: two disjoint
    # rectangles
    doc2 = styled_doc(
        "bar = 1 +\n  2\n", "x@EBinop(_, _, _) -> x { padding: 2; border-width: 1; }"
    )
    layout2 = layout_doc(doc2, MONO)
    binop2 = next(n for n in layout2.nodes.values() if n.node.path == (1, 3))
    assert classify_sblock(layout2, binop2) is SBlockCase.TWO_LINE_DISJOINT
    assert len([o for o in layout2.outlines if o.owner == binop2.index]) == 2


def test_zero_spacing_line_positions():
    doc = styled_doc("a = 1\nb = 2\nc = 3\n", "y@EInt(_) -> y { color: teal; }")
    layout = layout_doc(doc, MONO)
    assert layout.line_tops == [0.0, 16.0, 32.0, 48.0]


def test_multiline_gets_exactly_four_vgadgets():
    doc = styled_doc(
        "f =\n  aaa +\n  bbb +\n  ccc\n",
        "x@EBinop(_, _, _) -> x { border-width: 2; padding: 2; margin: 2; }",
    )
    layout = layout_doc(doc, MONO)
    multiline_owners = {
        n.index
        for n in layout.nodes.values()
        if n.spacing.total > 0 and classify_sblock(layout, n) is SBlockCase.MULTILINE
    }
    assert multiline_owners
    for owner in multiline_owners:
        segs = [g for g in layout.vgadgets if g.owner == owner]
        assert len(segs) == 4
        assert {g.case for g in segs} == {"h3-i", "h3-ii", "h3-iii", "h3-iv"}


def test_nested_multiline_blocks_are_inside():
    source = "f =\n  a +\n  b + c + (d +\n  e)\n"
    doc = styled_doc(source, "x@EBinop(_, _, _) -> x { border-width: 2; padding: 2; margin: 2; }")
    layout = layout_doc(doc, MONO)
    assert len(layout.outlines) >= 2


def test_monotone_growth_with_padding():
    source = "f = 1 + (2 + 3)\ng = f 9\n"
    small = layout_doc(styled_doc(source, "x@EBinop(_, _, _) -> x { padding: 1; }"), MONO)
    large = layout_doc(styled_doc(source, "x@EBinop(_, _, _) -> x { padding: 3; }"), MONO)
    assert len(small.fragments) == len(large.fragments)
    for fs, fl in zip(small.fragments, large.fragments):
        assert fl.x >= fs.x
    for ys, yl in zip(small.line_tops, large.line_tops):
        assert yl >= ys


def test_outline_validity():
    source = (DATA / "roundtrip" / "04_multiline_chain.tiny").read_text("utf-8")
    doc = styled_doc(
        source, "x@EBinop(_, _, _) -> x { border-width: 2; padding: 2; margin: 2; }"
    )
    layout = layout_doc(doc, MONO)
    assert layout.outlines
    for outline in layout.outlines:
        verts = outline.vertices
        assert len(verts) <= 8
        assert len(verts) >= 4
        # closed rectilinear ring: consecutive edges alternate axis
        n = len(verts)
        for i in range(n):
            (x0, y0), (x1, y1) = verts[i], verts[(i + 1) % n]
            assert (x0 == x1) != (y0 == y1), "edges must be axis-aligned and non-degenerate"
        assert _ring_is_simple(verts)


def _ring_is_simple(verts):
    n = len(verts)
    edges = [(verts[i], verts[(i + 1) % n]) for i in range(n)]

    def crosses(e1, e2):
        (ax0, ay0), (ax1, ay1) = e1
        (bx0, by0), (bx1, by1) = e2
        if ax0 == ax1 and bx0 == bx1:
            return False
        if ay0 == ay1 and by0 == by1:
            return False
        if ax0 == ax1:  # e1 vertical, e2 horizontal
            v, h = e1, e2
        else:
            v, h = e2, e1
        (vx, vy0), (_, vy1) = v
        (hx0, hy), (hx1, _) = h
        lo_y, hi_y = sorted((vy0, vy1))
        lo_x, hi_x = sorted((hx0, hx1))
        return lo_x < vx < hi_x and lo_y < hy < hi_y

    for i in range(n):
        for j in range(i + 1, n):
            if abs(i - j) in (0, 1, n - 1):
                continue
            if crosses(edges[i], edges[j]):
                return False
    return True


def test_blocks_sheet_outline_containment():
    from importlib import resources

    code = resources.files("css4code").joinpath("assets", "examples", "cloc.tiny").read_text("utf-8")
    sheet = resources.files("css4code").joinpath("assets", "examples", "blocks.c4c").read_text("utf-8")
    result = render_code(code, sheet)
    layout = result.layout
    regions = {o.owner: _region_of(o) for o in layout.outlines if o.case is not SBlockCase.TWO_LINE_DISJOINT}
    # owners sorted by depth: check every nested pair of binop outlines
    owners = sorted(regions, key=lambda o: layout.nodes[o].depth)
    for i, outer in enumerate(owners):
        for inner in owners[i + 1 :]:
            if _is_ancestor(layout, outer, inner):
                assert _region_contains(regions[outer], regions[inner]), (outer, inner)


def _region_of(outline):
    xs = [p[0] for p in outline.vertices]
    ys = [p[1] for p in outline.vertices]
    return (min(xs), min(ys), max(xs), max(ys))


def _region_contains(outer, inner):
    return (
        outer[0] <= inner[0]
        and outer[1] <= inner[1]
        and outer[2] >= inner[2]
        and outer[3] >= inner[3]
    )


def _is_ancestor(layout, a: int, b: int) -> bool:
    node_a = layout.nodes[a]
    return a != b and node_a.frag_start <= layout.nodes[b].frag_start and layout.nodes[b].frag_end <= node_a.frag_end and layout.nodes[b].depth > node_a.depth


def test_fragments_disjoint_in_document_order_per_line():
    source = (DATA / "roundtrip" / "30_kitchen_sink.tiny").read_text("utf-8")
    doc = styled_doc(
        source, "x@EBinop(_, _, _) -> x { border-width: 2; padding: 2; margin: 2; }"
    )
    layout = layout_doc(doc, MONO)
    by_line: dict[int, list] = {}
    for f in layout.fragments:
        by_line.setdefault(f.line, []).append(f)
    for frags in by_line.values():
        cursor = 0.0
        for f in frags:
            assert f.x >= cursor - 1e-9
            cursor = f.x_end


def test_golden_cloc_blocks_layout():
    # full geometry snapshot of the blocks example: fragments, gadget
    # stacking, and outline vertices
    import json
    from importlib import resources

    from css4code.layout import layout_to_json

    assets = resources.files("css4code").joinpath("assets", "examples")
    result = render_code(
        assets.joinpath("cloc.tiny").read_text("utf-8"),
        assets.joinpath("blocks.c4c").read_text("utf-8"),
    )
    produced = json.dumps(layout_to_json(result.layout), indent=2, sort_keys=True) + "\n"
    golden = (DATA / "golden_cloc_blocks_layout.json").read_text("utf-8")
    assert produced == golden
