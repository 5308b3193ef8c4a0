"""Stylish documents: display trees with provenance paths, classes and styles.

A document is a tree of text leaves (plus opaque HTML leaves) under nodes that
optionally carry a provenance path back into the value being displayed. Style
computation only ever rewrites the ``styles`` field; structure, paths, classes
and leaf content are preserved by every operation here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Union

from .values import Path, Value, path_apply

# Style attributes that flow down to descendants when not set directly.
INHERITABLE = frozenset({"color", "font-family", "font-size", "font-weight", "font-style"})


class StructureMismatch(Exception):
    """Raised when merging documents that are not structurally identical.

    Merging is only ever invoked on same-shape documents, so this signals an
    engine bug rather than a user error.
    """


_ATTR_NAME_CHARS = frozenset("abcdefghijklmnopqrstuvwxyz-")


@dataclass(frozen=True, order=True)
class StyleAttr:
    """A single attribute with the precedence used for cascade resolution."""

    name: str
    value: str
    precedence: int = 0

    def __post_init__(self) -> None:
        if not self.name or not set(self.name) <= _ATTR_NAME_CHARS:
            raise ValueError(f"invalid style attribute name: {self.name!r}")
        if not self.value:
            raise ValueError(f"style attribute {self.name!r} has an empty value")


StyleSet = frozenset[StyleAttr]

EMPTY_STYLES: StyleSet = frozenset()


@dataclass(frozen=True)
class TextLeaf:
    text: str


@dataclass(frozen=True)
class HtmlLeaf:
    """Uninterpreted HTML passed through to the renderer verbatim.

    Selectors never look inside; layout treats it as one opaque fragment.
    """

    html: str


@dataclass(frozen=True)
class DocNode:
    path: Optional[Path] = None
    classes: frozenset[str] = frozenset()
    styles: StyleSet = EMPTY_STYLES
    children: tuple["StylishDoc", ...] = ()

    def __post_init__(self) -> None:
        for cls in self.classes:
            if not cls or any(ch.isspace() for ch in cls):
                raise ValueError(f"invalid class name: {cls!r}")


StylishDoc = Union[TextLeaf, HtmlLeaf, DocNode]

# StyleEnv: output of a pattern match, mapping provenance paths to style sets.
StyleEnv = Mapping[Path, StyleSet]


def node(
    *children: StylishDoc,
    path: Optional[Path] = None,
    classes: Iterable[str] = (),
    styles: Iterable[StyleAttr] = (),
) -> DocNode:
    """Convenience constructor used by view functions and tests."""
    return DocNode(
        path=path,
        classes=frozenset(classes),
        styles=frozenset(styles),
        children=tuple(children),
    )


def text_content(doc: StylishDoc) -> str:
    """Concatenation of all text leaves in order; HTML leaves contribute
    nothing (they are not document text)."""
    parts: list[str] = []

    def go(d: StylishDoc) -> None:
        if isinstance(d, TextLeaf):
            parts.append(d.text)
        elif isinstance(d, DocNode):
            for child in d.children:
                go(child)

    go(doc)
    return "".join(parts)


def iter_nodes(doc: StylishDoc) -> Iterator[DocNode]:
    """All DocNodes in preorder."""
    if isinstance(doc, DocNode):
        yield doc
        for child in doc.children:
            yield from iter_nodes(child)


def invalid_paths(doc: StylishDoc, root: Value) -> list[Path]:
    """Provenance paths in the document that do not resolve under the root
    value. A correct view function produces none."""
    bad = []
    for n in iter_nodes(doc):
        if n.path is not None and path_apply(n.path, root) is None:
            bad.append(n.path)
    return bad


def apply_styles(env: StyleEnv, doc: StylishDoc) -> StylishDoc:
    """Union env(path) into every node of ``doc`` whose path is in the env.

    Structure, paths, classes and leaf content are untouched; an env path
    absent from the document simply has no effect.
    """
    if not env:
        return doc
    if isinstance(doc, (TextLeaf, HtmlLeaf)):
        return doc
    extra = env.get(doc.path) if doc.path is not None else None
    styles = doc.styles | extra if extra else doc.styles
    children = tuple(apply_styles(env, c) for c in doc.children)
    if styles is doc.styles and all(c is o for c, o in zip(children, doc.children)):
        return doc
    return DocNode(doc.path, doc.classes, styles, children)


def resolve_cascade(attrs: Iterable[StyleAttr]) -> StyleAttr:
    """Pick the winner among attributes sharing one name: highest precedence,
    ties broken by lexicographically greatest value. The tie-break makes whole
    stylesheet evaluation independent of rule order."""
    candidates = list(attrs)
    if not candidates:
        raise ValueError("resolve_cascade requires a non-empty attribute set")
    names = {a.name for a in candidates}
    if len(names) != 1:
        raise ValueError(f"resolve_cascade got mixed attribute names: {sorted(names)}")
    return max(candidates, key=lambda a: (a.precedence, a.value))


def cascade_styles(styles: Iterable[StyleAttr]) -> StyleSet:
    """Resolve every attribute name down to a single winning attribute."""
    by_name: dict[str, list[StyleAttr]] = {}
    for attr in styles:
        by_name.setdefault(attr.name, []).append(attr)
    return frozenset(resolve_cascade(group) for group in by_name.values())


def merge_docs(d1: StylishDoc, d2: StylishDoc) -> StylishDoc:
    """Node-wise union of style sets over two same-shape documents.

    The inputs must agree on structure, paths, classes and leaf content;
    conflicting attributes are resolved by the cascade.
    """
    if isinstance(d1, TextLeaf) and isinstance(d2, TextLeaf):
        if d1.text != d2.text:
            raise StructureMismatch("text leaves differ")
        return d1
    if isinstance(d1, HtmlLeaf) and isinstance(d2, HtmlLeaf):
        if d1.html != d2.html:
            raise StructureMismatch("html leaves differ")
        return d1
    if isinstance(d1, DocNode) and isinstance(d2, DocNode):
        if d1.path != d2.path or d1.classes != d2.classes:
            raise StructureMismatch("node path or classes differ")
        if len(d1.children) != len(d2.children):
            raise StructureMismatch("child counts differ")
        children = tuple(merge_docs(a, b) for a, b in zip(d1.children, d2.children))
        return DocNode(d1.path, d1.classes, cascade_styles(d1.styles | d2.styles), children)
    raise StructureMismatch(f"leaf kinds differ: {type(d1).__name__} vs {type(d2).__name__}")


def inherit_styles(doc: StylishDoc) -> StylishDoc:
    """Copy each inheritable attribute from the nearest ancestor that sets it
    onto descendants that do not. Expects the cascade to be resolved already
    (at most one attribute per name per node)."""

    def go(d: StylishDoc, inherited: dict[str, StyleAttr]) -> StylishDoc:
        if isinstance(d, (TextLeaf, HtmlLeaf)):
            return d
        own_names = {a.name for a in d.styles}
        added = [attr for name, attr in inherited.items() if name not in own_names]
        styles = d.styles | frozenset(added) if added else d.styles
        next_inherited = dict(inherited)
        for attr in d.styles:
            if attr.name in INHERITABLE:
                next_inherited[attr.name] = attr
        children = tuple(go(c, next_inherited) for c in d.children)
        return DocNode(d.path, d.classes, styles, children)

    return go(doc, {})


def doc_to_json(doc: StylishDoc) -> dict:
    """Canonical JSON dump; classes and styles are sorted so equal documents
    serialize to identical bytes."""
    if isinstance(doc, TextLeaf):
        return {"kind": "text", "text": doc.text}
    if isinstance(doc, HtmlLeaf):
        return {"kind": "html", "html": doc.html}
    return {
        "kind": "node",
        "path": list(doc.path) if doc.path is not None else None,
        "classes": sorted(doc.classes),
        "styles": [
            {"name": a.name, "value": a.value, "prec": a.precedence}
            for a in sorted(doc.styles)
        ],
        "children": [doc_to_json(c) for c in doc.children],
    }


def doc_from_json(data: dict) -> StylishDoc:
    kind = data["kind"]
    if kind == "text":
        return TextLeaf(data["text"])
    if kind == "html":
        return HtmlLeaf(data["html"])
    if kind == "node":
        return DocNode(
            path=tuple(data["path"]) if data.get("path") is not None else None,
            classes=frozenset(data.get("classes", [])),
            styles=frozenset(
                StyleAttr(s["name"], s["value"], s.get("prec", 0))
                for s in data.get("styles", [])
            ),
            children=tuple(doc_from_json(c) for c in data.get("children", [])),
        )
    raise ValueError(f"unknown document node kind: {kind!r}")
