from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from css4code.doc import (
    DocNode,
    StructureMismatch,
    StyleAttr,
    TextLeaf,
    apply_styles,
    cascade_styles,
    doc_from_json,
    doc_to_json,
    inherit_styles,
    merge_docs,
    node,
    resolve_cascade,
    text_content,
)

from tally_view import tally_doc, tally_value

ORANGE = StyleAttr("color", "orange")
TEAL1 = StyleAttr("color", "teal", 1)
GRAY = StyleAttr("color", "gray")


def paths_with_attr(doc, name):
    out = set()

    def go(d):
        if isinstance(d, DocNode):
            if any(a.name == name for a in d.styles) and d.path is not None:
                out.add(d.path)
            for c in d.children:
                go(c)

    go(doc)
    return out


def test_apply_styles_identity():
    doc = tally_doc(tally_value())
    assert apply_styles({}, doc) == doc


def test_apply_styles_targets_single_path():
    doc = tally_doc(tally_value())
    styled = apply_styles({(1,): frozenset({ORANGE})}, doc)
    assert paths_with_attr(styled, "color") == {(1,)}
    # structure, classes and text untouched
    assert text_content(styled) == text_content(doc)
    assert doc_to_json(styled)["children"][0]["classes"] == ["left"]


def test_apply_styles_missing_path_is_noop():
    doc = tally_doc(tally_value())
    assert apply_styles({(9, 9): frozenset({ORANGE})}, doc) == doc


def test_resolve_cascade_rules():
    assert resolve_cascade({TEAL1, ORANGE}) == TEAL1  # max precedence wins
    a = StyleAttr("color", "a")
    b = StyleAttr("color", "b")
    assert resolve_cascade({a, b}) == b  # lexicographic tie-break
    assert resolve_cascade({ORANGE}) == ORANGE
    with pytest.raises(ValueError):
        resolve_cascade(set())
    with pytest.raises(ValueError):
        resolve_cascade({ORANGE, StyleAttr("padding", "2")})


def test_merge_docs_idempotent_and_cascading():
    base = node(TextLeaf("x"), path=(1,))
    left = node(TextLeaf("x"), path=(1,), styles=[ORANGE])
    right = node(TextLeaf("x"), path=(1,), styles=[TEAL1])
    assert merge_docs(left, left) == left
    merged = merge_docs(left, right)
    assert merged.styles == frozenset({TEAL1})
    assert merge_docs(base, base) == base


def test_merge_docs_structure_mismatch():
    a = node(TextLeaf("x"))
    b = node(TextLeaf("x"), TextLeaf("y"))
    with pytest.raises(StructureMismatch):
        merge_docs(a, b)
    with pytest.raises(StructureMismatch):
        merge_docs(node(TextLeaf("x")), node(TextLeaf("z")))


def test_inherit_styles():
    child = node(TextLeaf("c"))
    teal_child = node(TextLeaf("t"), styles=[StyleAttr("color", "teal")])
    root = node(child, teal_child, styles=[GRAY, StyleAttr("border-width", "2")])
    result = inherit_styles(root)
    plain, teal = result.children
    assert GRAY in plain.styles  # inherited
    assert GRAY not in teal.styles  # own value wins
    assert not any(a.name == "border-width" for a in plain.styles)  # never inherits


def test_doc_json_round_trip():
    doc = tally_doc(tally_value())
    doc = apply_styles({(1, 1): frozenset({ORANGE})}, doc)
    assert doc_from_json(doc_to_json(doc)) == doc


# -- properties -------------------------------------------------------------

_attrs = st.builds(
    StyleAttr,
    st.sampled_from(["color", "background-color", "font-weight"]),
    st.sampled_from(["red", "blue", "bold"]),
    st.integers(min_value=0, max_value=2),
)


def _decorate(doc: DocNode, styles_by_node: list[frozenset]) -> DocNode:
    queue = list(styles_by_node)

    def go(d):
        if not isinstance(d, DocNode):
            return d
        extra = queue.pop(0) if queue else frozenset()
        return DocNode(d.path, d.classes, d.styles | extra, tuple(go(c) for c in d.children))

    return go(doc)


@given(
    st.lists(st.frozensets(_attrs, max_size=2), max_size=12),
    st.lists(st.frozensets(_attrs, max_size=2), max_size=12),
)
def test_merge_commutative(styles_a, styles_b):
    base = tally_doc(tally_value())
    a = _decorate(base, styles_a)
    b = _decorate(base, styles_b)
    assert merge_docs(a, b) == merge_docs(b, a)


@given(st.frozensets(_attrs, min_size=1, max_size=6))
def test_cascade_permutation_invariant(attrs):
    resolved = cascade_styles(attrs)
    for attr in resolved:
        same_name = {a for a in attrs if a.name == attr.name}
        assert resolve_cascade(same_name) == attr
    # one winner per name
    assert len({a.name for a in resolved}) == len(resolved)


@given(st.lists(st.frozensets(_attrs, max_size=2), max_size=12))
def test_apply_styles_preserves_text(styles_by_node):
    doc = tally_doc(tally_value())
    env = {(1,): frozenset({ORANGE}), (2, 1): frozenset({TEAL1})}
    assert text_content(apply_styles(env, _decorate(doc, styles_by_node))) == text_content(doc)


@given(
    st.lists(st.frozensets(_attrs, max_size=2), max_size=12),
    st.lists(st.frozensets(_attrs, max_size=2), max_size=12),
    st.lists(st.frozensets(_attrs, max_size=2), max_size=12),
)
def test_merge_associative(sa, sb, sc):
    base = tally_doc(tally_value())
    a, b, c = _decorate(base, sa), _decorate(base, sb), _decorate(base, sc)
    assert merge_docs(merge_docs(a, b), c) == merge_docs(a, merge_docs(b, c))


def test_style_attr_invariants():
    with pytest.raises(ValueError):
        StyleAttr("Color", "red")  # uppercase
    with pytest.raises(ValueError):
        StyleAttr("", "red")
    with pytest.raises(ValueError):
        StyleAttr("color", "")
    assert StyleAttr("border-width", "2").name == "border-width"
