"""Tiny: the demo source language driving the bundled stylesheets.

Tiny is a Haskell-flavored sliver: top-level type signatures
(``name :: Type -> Type``), equations (``name params = expr``), line
comments (``--``), integer and string literals, identifiers, binary
operators re-associated by a fixity table, application, lambdas
(``\\x -> e``), ``let ... in ...``, parens, and list literals.

Parsing produces a concrete syntax tree with byte offsets for every token,
so the view can reproduce the source text exactly, including comments and
blank lines. Every syntax node also projects to a constructor-tree value;
the view threads each node's provenance path onto the document node that
displays it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .doc import DocNode, StylishDoc, TextLeaf
from .values import ConstructorRegistry, Path, Value

# ---------------------------------------------------------------------------
# Lexing


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "int" | "string" | "op" | "punct" | "keyword"
    text: str
    start: int
    end: int
    line: int
    col: int


@dataclass(frozen=True)
class Comment:
    text: str
    start: int
    end: int
    line: int
    col: int


@dataclass(frozen=True)
class TinyDiagnostic:
    message: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.message}"


class TinyParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.diagnostic = TinyDiagnostic(message, line, col)


_SYMBOL_CHARS = set("!#$%&*+./<=>?@^|~:-\\")
_KEYWORDS = {"let", "in"}


def lex(source: str) -> tuple[list[Token], list[Comment]]:
    tokens: list[Token] = []
    comments: list[Comment] = []
    i, line, col = 0, 1, 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        start, start_line, start_col = i, line, col
        if source.startswith("--", i):
            j = source.find("\n", i)
            j = n if j < 0 else j
            comments.append(Comment(source[i:j], i, j, line, col))
            col += j - i
            i = j
            continue
        if ch == '"':
            j = i + 1
            while j < n:
                if source[j] == "\\" and j + 1 < n:
                    j += 2
                    continue
                if source[j] == '"':
                    j += 1
                    break
                if source[j] == "\n":
                    raise TinyParseError("unterminated string literal", start_line, start_col)
                j += 1
            else:
                raise TinyParseError("unterminated string literal", start_line, start_col)
            tokens.append(Token("string", source[start:j], start, j, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch in "0123456789":
            j = i
            while j < n and source[j] in "0123456789":
                j += 1
            tokens.append(Token("int", source[start:j], start, j, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] in "_'"):
                j += 1
            text = source[start:j]
            kind = "keyword" if text in _KEYWORDS else "ident"
            tokens.append(Token(kind, text, start, j, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch in "()[],":
            tokens.append(Token("punct", ch, i, i + 1, start_line, start_col))
            i += 1
            col += 1
            continue
        if ch in _SYMBOL_CHARS:
            j = i
            while j < n and source[j] in _SYMBOL_CHARS:
                j += 1
            tokens.append(Token("op", source[start:j], start, j, start_line, start_col))
            col += j - i
            i = j
            continue
        raise TinyParseError(f"unexpected character {ch!r}", start_line, start_col)
    return tokens, comments


# ---------------------------------------------------------------------------
# Fixity

Fixity = tuple[int, str]  # (precedence, "left" | "right")

DEFAULT_FIXITY: dict[str, Fixity] = {
    ".": (9, "right"),
    "*": (7, "left"),
    "/": (7, "left"),
    "+": (6, "left"),
    "-": (6, "left"),
    "++": (5, "right"),
    ":": (5, "right"),
    "==": (4, "left"),
    "/=": (4, "left"),
    "<": (4, "left"),
    "<=": (4, "left"),
    ">": (4, "left"),
    ">=": (4, "left"),
    "&&": (3, "right"),
    "||": (2, "right"),
    ">>": (1, "left"),
    ">>=": (1, "left"),
    ">>>": (1, "right"),
    "$": (0, "right"),
}

UNKNOWN_FIXITY: Fixity = (9, "left")


def fixity_of(table: Mapping[str, Fixity], op: str) -> Fixity:
    return table.get(op, UNKNOWN_FIXITY)


# ---------------------------------------------------------------------------
# Concrete syntax tree

# Operators that structure declarations/expressions and never act as binops.
_STRUCTURAL_OPS = {"=", "::", "->", "\\", "@", "|"}


@dataclass
class Syn:
    """A concrete syntax node. Leaves carry the token they display; inner
    nodes own any tokens in their span that fall outside child spans
    (keywords, parens, the ``=`` of an equation, ...)."""

    ctor: str
    children: list["Syn"] = field(default_factory=list)
    token: Optional[Token] = None
    start: int = 0
    end: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.token is not None


def _leaf(ctor: str, token: Token) -> Syn:
    return Syn(ctor, [], token, token.start, token.end)


def _wrap(ctor: str, children: list[Syn], start: int, end: int) -> Syn:
    return Syn(ctor, children, None, start, end)


def _ident(token: Token) -> Syn:
    return _wrap("Ident", [_leaf("Str", token)], token.start, token.end)


def _op(token: Token) -> Syn:
    return _wrap("Op", [_leaf("Str", token)], token.start, token.end)


class _TokenCursor:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, offset: int = 0) -> Optional[Token]:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1]
            raise TinyParseError("unexpected end of declaration", last.line, last.col)
        self.pos += 1
        return tok

    def expect(self, kind: str, text: Optional[str] = None) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            if tok is None:
                last = self.tokens[-1]
                raise TinyParseError(f"expected {want!r}", last.line, last.col)
            raise TinyParseError(f"expected {want!r}, found {tok.text!r}", tok.line, tok.col)
        return self.next()

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)


def _is_atom_start(tok: Optional[Token]) -> bool:
    if tok is None:
        return False
    if tok.kind in ("int", "string", "ident"):
        return True
    if tok.kind == "keyword" and tok.text == "let":
        return True
    if tok.kind == "punct" and tok.text in ("(", "["):
        return True
    if tok.kind == "op" and tok.text == "\\":
        return True
    return False


def _parse_expr(cur: _TokenCursor, fixity: Mapping[str, Fixity]) -> Syn:
    """Parse one operator expression: application groups joined by binary
    operators, re-associated per the fixity table."""
    operands = [_parse_app(cur, fixity)]
    ops: list[Token] = []
    while True:
        tok = cur.peek()
        if tok is None or tok.kind != "op" or tok.text in _STRUCTURAL_OPS:
            break
        ops.append(cur.next())
        operands.append(_parse_app(cur, fixity))
    if not ops:
        return operands[0]
    return reassociate(operands, ops, fixity)


def reassociate(operands: list[Syn], ops: list[Token], fixity: Mapping[str, Fixity]) -> Syn:
    """Build the binop tree for ``e0 op1 e1 op2 e2 ...`` honoring precedence
    and associativity. Idempotent: flattening the result and rebuilding
    yields the same tree."""

    # operands[k] sits left of ops[k]; pos counts ops consumed, so after
    # consuming ops[k] the right-hand operand is operands[pos].
    pos = [0]

    def climb(min_prec: int, operand_index: int) -> Syn:
        left = operands[operand_index]
        while pos[0] < len(ops):
            op_tok = ops[pos[0]]
            prec, assoc = fixity_of(fixity, op_tok.text)
            if prec < min_prec:
                break
            pos[0] += 1
            right = climb(prec + 1 if assoc == "left" else prec, pos[0])
            left = _wrap("EBinop", [left, _op(op_tok), right], left.start, right.end)
        return left

    result = climb(0, 0)
    if pos[0] != len(ops):
        tok = ops[pos[0]]
        raise TinyParseError(f"could not re-associate operator {tok.text!r}", tok.line, tok.col)
    return result


def _parse_app(cur: _TokenCursor, fixity: Mapping[str, Fixity]) -> Syn:
    atoms = [_parse_atom(cur, fixity)]
    while _is_atom_start(cur.peek()):
        atoms.append(_parse_atom(cur, fixity))
    expr = atoms[0]
    for arg in atoms[1:]:
        expr = _wrap("EApp", [expr, arg], expr.start, arg.end)
    return expr


def _parse_atom(cur: _TokenCursor, fixity: Mapping[str, Fixity]) -> Syn:
    tok = cur.peek()
    if tok is None:
        raise TinyParseError("expected an expression", 0, 0)
    if tok.kind == "int":
        cur.next()
        return _wrap("EInt", [_leaf("Int", tok)], tok.start, tok.end)
    if tok.kind == "string":
        cur.next()
        return _wrap("EString", [_leaf("Str", tok)], tok.start, tok.end)
    if tok.kind == "ident":
        cur.next()
        return _wrap("EVar", [_ident(tok)], tok.start, tok.end)
    if tok.kind == "punct" and tok.text == "(":
        cur.next()
        inner = _parse_expr(cur, fixity)
        close = cur.expect("punct", ")")
        return _wrap("EParen", [inner], tok.start, close.end)
    if tok.kind == "punct" and tok.text == "[":
        cur.next()
        elements: list[Syn] = []
        nxt = cur.peek()
        if nxt is not None and nxt.kind == "punct" and nxt.text == "]":
            close = cur.next()
            return _wrap("EList", [], tok.start, close.end)
        while True:
            elements.append(_parse_expr(cur, fixity))
            nxt = cur.peek()
            if nxt is not None and nxt.kind == "punct" and nxt.text == ",":
                cur.next()
                continue
            close = cur.expect("punct", "]")
            return _wrap("EList", elements, tok.start, close.end)
    if tok.kind == "op" and tok.text == "\\":
        cur.next()
        params: list[Syn] = []
        while True:
            nxt = cur.peek()
            if nxt is not None and nxt.kind == "ident":
                params.append(_ident(cur.next()))
            else:
                break
        if not params:
            raise TinyParseError("lambda requires at least one parameter", tok.line, tok.col)
        cur.expect("op", "->")
        body = _parse_expr(cur, fixity)
        pgroup = _wrap("Params", params, params[0].start, params[-1].end)
        return _wrap("ELam", [pgroup, body], tok.start, body.end)
    if tok.kind == "keyword" and tok.text == "let":
        cur.next()
        name = _ident(cur.expect("ident"))
        cur.expect("op", "=")
        rhs = _parse_expr(cur, fixity)
        cur.expect("keyword", "in")
        body = _parse_expr(cur, fixity)
        return _wrap("ELet", [name, rhs, body], tok.start, body.end)
    raise TinyParseError(f"unexpected token {tok.text!r}", tok.line, tok.col)


def _parse_type_seq(tokens: list[Token]) -> Syn:
    """Signature bodies stay flat: named type atoms become TCon/TVar values,
    arrows and parens remain concrete tokens of the sequence."""
    if not tokens:
        raise TinyParseError("signature has an empty type", 0, 0)
    atoms: list[Syn] = []
    for tok in tokens:
        if tok.kind == "ident":
            ctor = "TCon" if tok.text[0].isupper() else "TVar"
            atoms.append(_wrap(ctor, [_ident(tok)], tok.start, tok.end))
    return _wrap("TypeSeq", atoms, tokens[0].start, tokens[-1].end)


def _parse_decl(tokens: list[Token], fixity: Mapping[str, Fixity]) -> Syn:
    head = tokens[0]
    if head.kind != "ident":
        raise TinyParseError(
            f"declarations start with a name, found {head.text!r}", head.line, head.col
        )
    if len(tokens) >= 2 and tokens[1].kind == "op" and tokens[1].text == "::":
        name = _ident(head)
        dcolon = _leaf("DColon", tokens[1])
        typeseq = _parse_type_seq(tokens[2:])
        return _wrap("Signature", [name, dcolon, typeseq], head.start, typeseq.end)
    cur = _TokenCursor(tokens)
    name = _ident(cur.next())
    params: list[Syn] = []
    while True:
        tok = cur.peek()
        if tok is not None and tok.kind == "ident":
            params.append(_ident(cur.next()))
        else:
            break
    eq = cur.expect("op", "=")
    body = _parse_expr(cur, fixity)
    if not cur.at_end():
        stray = cur.peek()
        assert stray is not None
        raise TinyParseError(f"unexpected token {stray.text!r} after expression", stray.line, stray.col)
    if params:
        pgroup = _wrap("Params", params, params[0].start, params[-1].end)
    else:
        pgroup = _wrap("Params", [], name.end, name.end)
    return _wrap("Equation", [name, pgroup, body], head.start, body.end)


@dataclass
class TinyProgram:
    source: str
    root: Syn
    tokens: list[Token]
    comments: list[Comment]


def parse_tiny(source: str, fixity: Optional[Mapping[str, Fixity]] = None) -> TinyProgram:
    """Parse a Tiny module. Declarations begin in column 1; indented lines
    continue the current declaration. Raises TinyParseError with position."""
    table = DEFAULT_FIXITY if fixity is None else fixity
    tokens, comments = lex(source)
    groups: list[list[Token]] = []
    for tok in tokens:
        if tok.col == 1:
            groups.append([tok])
        elif groups:
            groups[-1].append(tok)
        else:
            raise TinyParseError(
                "indented text before the first declaration", tok.line, tok.col
            )
    decls = [_parse_decl(group, table) for group in groups]
    root = _wrap("Program", decls, 0, len(source))
    return TinyProgram(source, root, tokens, comments)


# ---------------------------------------------------------------------------
# Values and the constructor registry


def tiny_registry() -> ConstructorRegistry:
    reg = ConstructorRegistry()
    reg.add("Program", "Program", None)
    reg.add("Decl", "Signature", 3)
    reg.add("Decl", "Equation", 3)
    reg.add("Params", "Params", None)
    reg.add("Punct", "DColon", 0)
    reg.add("TypeSeq", "TypeSeq", None)
    reg.add("TypeAtom", "TCon", 1)
    reg.add("TypeAtom", "TVar", 1)
    reg.add("Name", "Ident", 1)
    reg.add("OpName", "Op", 1)
    for ctor, arity in [
        ("EInt", 1),
        ("EString", 1),
        ("EVar", 1),
        ("EBinop", 3),
        ("EApp", 2),
        ("ELam", 2),
        ("ELet", 3),
        ("EParen", 1),
        ("EList", None),
    ]:
        reg.add("Exp", ctor, arity)
    # Demo prelude datatypes (tally marks and friends).
    reg.add("List", "List", None)
    reg.add("Either", "Left", 1)
    reg.add("Either", "Right", 1)
    reg.add("Prim", "Int", 0)
    reg.add("Prim", "Str", 0)
    return reg


TINY_REGISTRY = tiny_registry()

EXP_CTORS = frozenset(
    {"EInt", "EString", "EVar", "EBinop", "EApp", "ELam", "ELet", "EParen", "EList"}
)


def value_of(syn: Syn) -> Value:
    """Project the concrete tree onto its constructor-tree value. Identifier
    values carry a "cap" annotation (capitalized or not) for predicates."""
    if syn.is_leaf:
        assert syn.token is not None
        return Value(syn.ctor, (), syn.token.text)
    children = tuple(value_of(c) for c in syn.children)
    ann = {}
    if syn.ctor == "Ident":
        ann = {"cap": syn.children[0].token.text[0].isupper()}  # type: ignore[union-attr]
    return Value(syn.ctor, children, None, ann)


# ---------------------------------------------------------------------------
# View: stylish document with exact source text and provenance paths

_CTOR_CLASSES = {
    "Ident": "ident",
    "Op": "op",
    "DColon": "op",
    "EInt": "int",
    "EString": "string",
}

_TOKEN_CLASSES = {"keyword": "keyword", "op": "op"}


def view_tiny(program: TinyProgram) -> DocNode:
    """Document whose text content equals the source byte-for-byte. Every
    syntax node carries its provenance path; comments become path-less nodes
    with class "comment"; tokens carry their lexical-category class."""
    source = program.source
    tokens = sorted(program.tokens, key=lambda t: t.start)
    comments = sorted(program.comments, key=lambda c: c.start)

    def build(syn: Syn, path: Path, toks: list[Token], comms: list[Comment]) -> DocNode:
        classes = frozenset({_CTOR_CLASSES[syn.ctor]}) if syn.ctor in _CTOR_CLASSES else frozenset()
        if syn.is_leaf:
            assert syn.token is not None
            return DocNode(path, classes, frozenset(), (TextLeaf(syn.token.text),))

        items: list[tuple[int, int, str, object]] = []
        consumed: list[tuple[int, int]] = []
        for i, child in enumerate(syn.children, start=1):
            items.append((child.start, child.end, "syn", (child, path + (i,))))
            consumed.append((child.start, child.end))

        def inside_child(start: int) -> bool:
            return any(a <= start < b for a, b in consumed)

        child_toks = [t for t in toks if syn.start <= t.start < syn.end]
        child_comms = [c for c in comms if syn.start <= c.start < syn.end]
        for tok in child_toks:
            if not inside_child(tok.start):
                items.append((tok.start, tok.end, "tok", tok))
        for com in child_comms:
            if not inside_child(com.start):
                items.append((com.start, com.end, "comment", com))
        items.sort(key=lambda item: (item[0], item[1]))

        children: list[StylishDoc] = []
        cursor = syn.start
        for start, end, kind, payload in items:
            if start > cursor:
                children.append(TextLeaf(source[cursor:start]))
            if kind == "syn":
                child, child_path = payload  # type: ignore[misc]
                sub_toks = [t for t in child_toks if child.start <= t.start < child.end]
                sub_comms = [c for c in child_comms if child.start <= c.start < child.end]
                children.append(build(child, child_path, sub_toks, sub_comms))
            elif kind == "tok":
                tok = payload
                cls = _TOKEN_CLASSES.get(tok.kind)  # type: ignore[union-attr]
                text = TextLeaf(tok.text)  # type: ignore[union-attr]
                if cls:
                    children.append(DocNode(None, frozenset({cls}), frozenset(), (text,)))
                else:
                    children.append(text)
            else:
                com = payload
                children.append(
                    DocNode(
                        None,
                        frozenset({"comment"}),
                        frozenset(),
                        (TextLeaf(com.text),),  # type: ignore[union-attr]
                    )
                )
            cursor = end
        if syn.end > cursor:
            children.append(TextLeaf(source[cursor : syn.end]))
        return DocNode(path, classes, frozenset(), tuple(children))

    return build(program.root, (), tokens, comments)
