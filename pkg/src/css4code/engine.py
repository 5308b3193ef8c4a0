"""Deterministic stylesheet evaluation over a (root value, document) pair.

The engine enumerates every match of every rule exhaustively (depth-first,
children in order) instead of the relational one-match-at-a-time reading;
the outcome is the same set of styling events, independent of rule order.

Matching walks the document; pattern selectors hop through a node's
provenance path into the value tree to destructure it. Keep-out positions
inside a matched pattern prune all later combinator traversal beneath them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from . import sheet as S
from .doc import (
    DocNode,
    EMPTY_STYLES,
    StyleSet,
    StylishDoc,
    cascade_styles,
    inherit_styles,
)
from .predicates import EvalError, eval_predicate
from .values import ConstructorRegistry, Path, Value, is_prefix, path_apply, path_extend


@dataclass(frozen=True)
class PatternMatch:
    env: dict[str, tuple[Value, Path]]
    style_env: dict[Path, StyleSet]
    keep_outs: tuple[Path, ...]


@dataclass(frozen=True)
class StyleEvent:
    """One (rule, node, styles) styling fact produced by evaluation."""

    rule_index: int
    node_index: int
    styles: StyleSet


@dataclass(frozen=True)
class EngineDiagnostic:
    """Evaluation-time note attached to a rule, exposed via the CLI."""

    rule_index: int
    message: str
    kind: str  # "guard-eval-error" | "no-op" | "non-local-path"

    def __str__(self) -> str:
        return f"rule {self.rule_index}: {self.message} [{self.kind}]"


@dataclass
class EngineResult:
    doc: StylishDoc
    events: set[StyleEvent] = field(default_factory=set)
    diagnostics: list[EngineDiagnostic] = field(default_factory=list)


class DocIndex:
    """Preorder-indexed view of a document's nodes; leaves are not indexed.

    Node indices are stable across restyling because styling never changes
    document structure.
    """

    def __init__(self, root: StylishDoc):
        self.root = root
        self.nodes: list[DocNode] = []
        self.parent: list[Optional[int]] = []
        self.child_nodes: list[list[int]] = []

        def build(d: StylishDoc, parent: Optional[int]) -> None:
            if not isinstance(d, DocNode):
                return
            idx = len(self.nodes)
            self.nodes.append(d)
            self.parent.append(parent)
            self.child_nodes.append([])
            if parent is not None:
                self.child_nodes[parent].append(idx)
            for child in d.children:
                build(child, idx)

        build(root, None)

    def __len__(self) -> int:
        return len(self.nodes)

    def descendants(self, idx: int, pruned: "_Pruner") -> Iterator[int]:
        """Proper descendant nodes in preorder, skipping pruned subtrees."""
        for child in self.child_nodes[idx]:
            if pruned(self.nodes[child]):
                continue
            yield child
            yield from self.descendants(child, pruned)

    def subtree(self, idx: int) -> Iterator[int]:
        yield idx
        for child in self.child_nodes[idx]:
            yield from self.subtree(child)

    def siblings_after(self, idx: int) -> list[int]:
        parent = self.parent[idx]
        if parent is None:
            return []
        sibs = self.child_nodes[parent]
        return sibs[sibs.index(idx) + 1 :]


class _Pruner:
    """Predicate for document nodes inside a keep-out region: any node whose
    path extends one of the recorded keep-out paths."""

    def __init__(self, keep_outs: tuple[Path, ...]):
        self.keep_outs = keep_outs

    def __call__(self, node: DocNode) -> bool:
        if node.path is None or not self.keep_outs:
            return False
        return any(is_prefix(k, node.path) for k in self.keep_outs)


def match_pattern(
    pattern: S.IPattern,
    value: Value,
    path: Path,
    registry: ConstructorRegistry,
) -> Optional[PatternMatch]:
    """Destructure ``value`` (located at ``path``) with a style-carrying
    pattern. A whole-pattern keep-out never matches; keep-out arguments
    accept any subvalue while recording their position for pruning."""
    if isinstance(pattern, S.IKeepOut):
        return None
    if isinstance(pattern, S.IWildcard):
        return PatternMatch({}, {}, ())
    if isinstance(pattern, S.ILitInt):
        if value.token is None:
            return None
        try:
            ok = int(value.token) == pattern.value
        except ValueError:
            ok = False
        return PatternMatch({}, {}, ()) if ok else None
    if isinstance(pattern, S.ILitStr):
        if value.token != pattern.value:
            return None
        return PatternMatch({}, {}, ())
    if isinstance(pattern, S.IVar):
        if pattern.datatype is not None:
            if value.ctor not in registry.entries.get(pattern.datatype, {}):
                return None
        env = {pattern.name: (value, path)} if pattern.name else {}
        style_env = {path: pattern.styles} if pattern.styles else {}
        return PatternMatch(env, style_env, ())
    if isinstance(pattern, S.ICtor):
        if value.ctor != pattern.ctor or len(value.children) != len(pattern.args):
            return None
        env: dict[str, tuple[Value, Path]] = {}
        style_env: dict[Path, StyleSet] = {}
        keep_outs: list[Path] = []
        for i, (arg, child) in enumerate(zip(pattern.args, value.children), start=1):
            child_path = path_extend(path, i)
            if isinstance(arg, S.IKeepOut):
                keep_outs.append(child_path)
                continue
            sub = match_pattern(arg, child, child_path, registry)
            if sub is None:
                return None
            env.update(sub.env)
            for p, styles in sub.style_env.items():
                style_env[p] = style_env.get(p, EMPTY_STYLES) | styles
            keep_outs.extend(sub.keep_outs)
        if pattern.binder:
            env[pattern.binder] = (value, path)
        if pattern.styles:
            style_env[path] = style_env.get(path, EMPTY_STYLES) | pattern.styles
        return PatternMatch(env, style_env, tuple(keep_outs))
    raise TypeError(pattern)


@dataclass(frozen=True)
class NodeMatch:
    """Outcome of one node selector at one document node."""

    env: dict[str, tuple[Value, Path]]
    style_env: dict[Path, StyleSet]  # applied within the node's subtree
    direct_styles: StyleSet  # applied to the node itself (class selectors)
    keep_outs: tuple[Path, ...]


def match_node_selector(
    sel: S.INodeSelector,
    node: DocNode,
    root: Value,
    registry: ConstructorRegistry,
) -> Optional[NodeMatch]:
    if not sel.classes <= node.classes:
        return None
    basic = sel.basic
    if isinstance(basic, S.ITop):
        return NodeMatch({}, {}, EMPTY_STYLES, ())
    if isinstance(basic, S.IClassSel):
        # Styles anchor to the matched document node itself, whether or not
        # it carries a path.
        return NodeMatch({}, {}, basic.styles, ())
    if node.path is None:
        return None
    value = path_apply(node.path, root)
    if value is None:
        return None
    result = match_pattern(basic, value, node.path, registry)
    if result is None:
        return None
    return NodeMatch(result.env, result.style_env, EMPTY_STYLES, result.keep_outs)


@dataclass(frozen=True)
class SelectorMatch:
    """One complete match of a path selector: per-step anchors with the
    styles they contribute, plus the combined variable environment."""

    env: dict[str, tuple[Value, Path]]
    anchored: tuple[tuple[int, "NodeMatch"], ...]  # (node index, step outcome)


def match_path_selector(
    rule: S.InternalRule,
    index: DocIndex,
    root: Value,
    registry: ConstructorRegistry,
) -> list[SelectorMatch]:
    """All matches of a rule's selector anywhere in the document, found by
    depth-first search with children visited in order."""
    matches: list[SelectorMatch] = []

    def extend(
        step: int,
        at: int,
        env: dict[str, tuple[Value, Path]],
        anchored: tuple[tuple[int, NodeMatch], ...],
        keep_outs: tuple[Path, ...],
    ) -> None:
        sel = rule.head if step == 0 else rule.tail[step - 1][1]
        outcome = match_node_selector(sel, index.nodes[at], root, registry)
        if outcome is None:
            return
        env2 = dict(env)
        env2.update(outcome.env)
        anchored2 = anchored + ((at, outcome),)
        keep2 = keep_outs + outcome.keep_outs
        if step == len(rule.tail):
            matches.append(SelectorMatch(env2, anchored2))
            return
        comb = rule.tail[step][0]
        pruner = _Pruner(keep2)
        if comb is S.Combinator.CHILD:
            candidates = [c for c in index.child_nodes[at] if not pruner(index.nodes[c])]
        elif comb is S.Combinator.DESCENDANT:
            candidates = list(index.descendants(at, pruner))
        elif comb is S.Combinator.NEXT_SIBLING:
            after = index.siblings_after(at)
            candidates = [after[0]] if after and not pruner(index.nodes[after[0]]) else []
        else:  # SUBSEQUENT_SIBLING
            candidates = [c for c in index.siblings_after(at) if not pruner(index.nodes[c])]
        for cand in candidates:
            extend(step + 1, cand, env2, anchored2, keep2)

    for start in range(len(index)):
        extend(0, start, {}, (), ())
    return matches


def _realize_styles(
    match: SelectorMatch,
    index: DocIndex,
    rule_index: int,
    diagnostics: list[EngineDiagnostic],
) -> Iterator[tuple[int, StyleSet]]:
    """Turn a selector match into concrete (node index, styles) facts.

    A pattern step's style environment is applied within the subtree of its
    anchor: every node there whose path is in the environment's domain is
    decorated. Class-anchored styles decorate the anchor directly.
    """
    for node_idx, outcome in match.anchored:
        if outcome.direct_styles:
            yield node_idx, outcome.direct_styles
        if not outcome.style_env:
            continue
        anchor_path = index.nodes[node_idx].path
        env = outcome.style_env
        if anchor_path is not None:
            local = {}
            for p, styles in env.items():
                if is_prefix(anchor_path, p):
                    local[p] = styles
                else:
                    diagnostics.append(
                        EngineDiagnostic(
                            rule_index,
                            f"dropped non-local styled path {list(p)}",
                            "non-local-path",
                        )
                    )
            env = local
        for sub_idx in index.subtree(node_idx):
            sub_path = index.nodes[sub_idx].path
            if sub_path is not None and sub_path in env and env[sub_path]:
                yield sub_idx, env[sub_path]


def apply_rule_events(
    rule: S.InternalRule,
    index: DocIndex,
    root: Value,
    registry: ConstructorRegistry,
    rule_index: int = 0,
) -> tuple[set[StyleEvent], list[EngineDiagnostic]]:
    events: set[StyleEvent] = set()
    diagnostics: list[EngineDiagnostic] = []
    for match in match_path_selector(rule, index, root, registry):
        try:
            if not eval_predicate(match.env, rule.guard):
                continue
        except EvalError as exc:
            diagnostics.append(
                EngineDiagnostic(
                    rule_index, f"guard failed to evaluate: {exc}", "guard-eval-error"
                )
            )
            continue
        for node_idx, styles in _realize_styles(match, index, rule_index, diagnostics):
            events.add(StyleEvent(rule_index, node_idx, styles))
    if not events:
        diagnostics.append(EngineDiagnostic(rule_index, "rule styled nothing", "no-op"))
    return events, diagnostics


def _rebuild_with_events(index: DocIndex, events: set[StyleEvent]) -> StylishDoc:
    extra: dict[int, StyleSet] = {}
    for ev in events:
        extra[ev.node_index] = extra.get(ev.node_index, EMPTY_STYLES) | ev.styles

    counter = [-1]

    def go(d: StylishDoc) -> StylishDoc:
        if not isinstance(d, DocNode):
            return d
        counter[0] += 1
        idx = counter[0]
        children = tuple(go(c) for c in d.children)
        styles = d.styles | extra.get(idx, EMPTY_STYLES)
        return DocNode(d.path, d.classes, styles, children)

    return go(index.root)


def apply_rule(
    rule: S.InternalRule,
    doc: StylishDoc,
    root: Value,
    registry: ConstructorRegistry,
    rule_index: int = 0,
) -> EngineResult:
    """Apply one rule everywhere it matches, unioning all styles it produces
    into the document (no cascade resolution at this stage)."""
    index = DocIndex(doc)
    events, diagnostics = apply_rule_events(rule, index, root, registry, rule_index)
    return EngineResult(_rebuild_with_events(index, events), events, diagnostics)


def apply_stylesheet(
    rules: list[S.InternalRule],
    doc: StylishDoc,
    root: Value,
    registry: ConstructorRegistry,
) -> EngineResult:
    """Evaluate every rule, merge all styling events, resolve the cascade per
    node and attribute, and run inheritance. Equivalent to merging per-rule
    documents; rule order never affects the output."""
    index = DocIndex(doc)
    all_events: set[StyleEvent] = set()
    diagnostics: list[EngineDiagnostic] = []
    for i, rule in enumerate(rules):
        events, diags = apply_rule_events(rule, index, root, registry, i)
        all_events |= events
        diagnostics.extend(diags)

    extra: dict[int, StyleSet] = {}
    for ev in all_events:
        extra[ev.node_index] = extra.get(ev.node_index, EMPTY_STYLES) | ev.styles

    counter = [-1]

    def go(d: StylishDoc) -> StylishDoc:
        if not isinstance(d, DocNode):
            return d
        counter[0] += 1
        idx = counter[0]
        children = tuple(go(c) for c in d.children)
        styles = cascade_styles(d.styles | extra.get(idx, EMPTY_STYLES))
        return DocNode(d.path, d.classes, styles, children)

    styled = inherit_styles(go(index.root))
    return EngineResult(styled, all_events, diagnostics)
