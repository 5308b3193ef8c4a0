"""Stylesheet syntax: parsing `.c4c` text, checking, and desugaring.

External rules pair a selector list (and optional guard) with named style
sets; desugaring produces one internal rule per selector, with each name's
styles attached directly at the position that binds the name. The internal
form is what the style engine evaluates.

Grammar (comments run `--` to end of line; descendant combinator is plain
whitespace between node selectors):

    sheet     := rule* ;
    rule      := sel_list guard? "->" styled+ ;
    sel_list  := selector ("," selector)* ;
    selector  := node_sel (comb node_sel)* ;
    comb      := ">" | "~" | "+" | (whitespace alone) ;
    node_sel  := basic ("." CLASS)* | (IDENT "@")? ("." CLASS)+ ;
    basic     := "xxx" | "_" | IDENT (":" TYPEID)? | (IDENT "@")? ctor ;
    ctor      := TYPEID | TYPEID "(" pattern ("," pattern)* ")" | "(" ctor ")" ;
    pattern   := basic | INT | STRING ;
    guard     := "if" pred_expr ;
    styled    := IDENT+ "{" (ATTR ":" VALUE ("!" INT)? ";")* "}" ;
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Union

from . import predicates as P
from .doc import EMPTY_STYLES, StyleAttr, StyleSet
from .values import ConstructorRegistry

# ---------------------------------------------------------------------------
# External syntax


class Combinator(enum.Enum):
    CHILD = ">"
    DESCENDANT = " "
    NEXT_SIBLING = "+"
    SUBSEQUENT_SIBLING = "~"


@dataclass(frozen=True)
class Wildcard:
    pass


@dataclass(frozen=True)
class KeepOut:
    """Never matches on its own; as a constructor argument it accepts the
    subvalue while pruning all later combinator search beneath it."""


@dataclass(frozen=True)
class VarPat:
    name: Optional[str] = None
    datatype: Optional[str] = None


@dataclass(frozen=True)
class CtorPat:
    ctor: str
    args: tuple["Pattern", ...] = ()
    binder: Optional[str] = None


@dataclass(frozen=True)
class LitIntPat:
    value: int


@dataclass(frozen=True)
class LitStrPat:
    value: str


Pattern = Union[Wildcard, KeepOut, VarPat, CtorPat, LitIntPat, LitStrPat]


@dataclass(frozen=True)
class ClassBinding:
    """Selects by class alone; the optional binder names the matched document
    node for styling (never for predicates, since no value is bound)."""

    binder: Optional[str] = None


@dataclass(frozen=True)
class Top:
    """Matches any node; engine-internal, never produced by the parser."""


Basic = Union[Pattern, ClassBinding, Top]


@dataclass(frozen=True)
class NodeSelector:
    basic: Basic
    classes: frozenset[str] = frozenset()


@dataclass(frozen=True)
class PathSelector:
    head: NodeSelector
    tail: tuple[tuple[Combinator, NodeSelector], ...] = ()

    def steps(self) -> list[NodeSelector]:
        return [self.head] + [sel for _, sel in self.tail]


@dataclass(frozen=True)
class ExternalRule:
    selectors: tuple[PathSelector, ...]
    guard: Optional[P.PredicateExpr]
    named_styles: tuple[tuple[str, StyleSet], ...]
    line: int = 0

    def styles_of(self, name: str) -> StyleSet:
        for n, styles in self.named_styles:
            if n == name:
                return styles
        return EMPTY_STYLES


# ---------------------------------------------------------------------------
# Internal syntax: style sets attached at binding positions


@dataclass(frozen=True)
class IWildcard:
    pass


@dataclass(frozen=True)
class IKeepOut:
    pass


@dataclass(frozen=True)
class IVar:
    name: Optional[str]
    datatype: Optional[str]
    styles: StyleSet = EMPTY_STYLES


@dataclass(frozen=True)
class ICtor:
    ctor: str
    args: tuple["IPattern", ...]
    binder: Optional[str] = None
    styles: StyleSet = EMPTY_STYLES


@dataclass(frozen=True)
class ILitInt:
    value: int


@dataclass(frozen=True)
class ILitStr:
    value: str


IPattern = Union[IWildcard, IKeepOut, IVar, ICtor, ILitInt, ILitStr]


@dataclass(frozen=True)
class IClassSel:
    binder: Optional[str]
    styles: StyleSet = EMPTY_STYLES


@dataclass(frozen=True)
class ITop:
    pass


IBasic = Union[IPattern, IClassSel, ITop]


@dataclass(frozen=True)
class INodeSelector:
    basic: IBasic
    classes: frozenset[str] = frozenset()


@dataclass(frozen=True)
class InternalRule:
    head: INodeSelector
    tail: tuple[tuple[Combinator, INodeSelector], ...]
    guard: P.PredicateExpr
    source_line: int = 0


# ---------------------------------------------------------------------------
# Diagnostics


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    line: int = 0
    col: int = 0
    kind: str = "syntax"

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.severity}: {self.message}"


@dataclass
class ParseResult:
    rules: list[ExternalRule] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(d.severity == "error" for d in self.diagnostics)


class _SheetSyntaxError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(message)
        self.diagnostic = Diagnostic("error", message, line, col, "syntax")


# ---------------------------------------------------------------------------
# Scanner / parser (cursor-based; whitespace is significant between node
# selectors, so the parser reads characters directly instead of a token list)

_IDENT_START = set("abcdefghijklmnopqrstuvwxyz_")
_TYPEID_START = set("ABCDEFGHIJKLMNOPQRSTUVWXYZ")
_IDENT_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_'")
_CLASS_CHARS = _IDENT_CHARS | {"-"}
_RESERVED = {"if", "in", "mod", "not", "true", "false", "xxx"}
_DIGITS = set("0123456789")


def _is_digit(ch: str) -> bool:
    # ASCII only: str.isdigit() accepts Unicode digits int() rejects
    return ch in _DIGITS


class _Cursor:
    def __init__(self, src: str):
        self.src = src
        self.pos = 0

    def at_end(self) -> bool:
        return self.pos >= len(self.src)

    def peek(self, offset: int = 0) -> str:
        i = self.pos + offset
        return self.src[i] if i < len(self.src) else ""

    def startswith(self, s: str) -> bool:
        return self.src.startswith(s, self.pos)

    def advance(self, n: int = 1) -> None:
        self.pos += n

    def line_col(self, pos: Optional[int] = None) -> tuple[int, int]:
        p = self.pos if pos is None else pos
        line = self.src.count("\n", 0, p) + 1
        last_nl = self.src.rfind("\n", 0, p)
        return line, p - last_nl

    def error(self, message: str) -> _SheetSyntaxError:
        line, col = self.line_col()
        return _SheetSyntaxError(message, line, col)

    def skip_space(self) -> None:
        while not self.at_end():
            ch = self.peek()
            if ch in " \t\r\n":
                self.advance()
            elif self.startswith("--"):
                nl = self.src.find("\n", self.pos)
                self.pos = len(self.src) if nl < 0 else nl
            else:
                return

    def read_while(self, allowed: set[str]) -> str:
        start = self.pos
        while not self.at_end() and self.peek() in allowed:
            self.advance()
        return self.src[start : self.pos]

    def expect(self, s: str) -> None:
        if not self.startswith(s):
            raise self.error(f"expected {s!r}")
        self.advance(len(s))

    def read_ident(self) -> str:
        if self.peek() not in _IDENT_START:
            raise self.error("expected an identifier")
        return self.read_while(_IDENT_CHARS)

    def read_typeid(self) -> str:
        if self.peek() not in _TYPEID_START:
            raise self.error("expected a constructor or datatype name")
        return self.read_while(_IDENT_CHARS)

    def read_string(self) -> str:
        self.expect('"')
        out: list[str] = []
        while True:
            if self.at_end():
                raise self.error("unterminated string literal")
            ch = self.peek()
            self.advance()
            if ch == '"':
                return "".join(out)
            if ch == "\\":
                esc = self.peek()
                self.advance()
                out.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc, esc))
            else:
                out.append(ch)

    def read_number(self) -> Union[int, float]:
        start = self.pos
        if self.peek() == "-":
            self.advance()
        if not _is_digit(self.peek()):
            raise self.error("expected a number")
        self.read_while(_DIGITS)
        is_float = False
        if self.peek() == "." and _is_digit(self.peek(1)):
            is_float = True
            self.advance()
            self.read_while(_DIGITS)
        text = self.src[start : self.pos]
        return float(text) if is_float else int(text)


def _looks_like_node_sel(cur: _Cursor) -> bool:
    ch = cur.peek()
    if ch == "." or ch == "(" or ch == "_":
        return True
    if ch in _TYPEID_START:
        return True
    if ch in _IDENT_START:
        # "if" starts the guard, never a selector
        save = cur.pos
        word = cur.read_while(_IDENT_CHARS)
        cur.pos = save
        return word != "if"
    return False


def _parse_classes(cur: _Cursor) -> frozenset[str]:
    classes: set[str] = set()
    while cur.peek() == ".":
        cur.advance()
        name = cur.read_while(_CLASS_CHARS)
        if not name:
            raise cur.error("expected a class name after '.'")
        classes.add(name)
    return frozenset(classes)


def _parse_ctor(cur: _Cursor, binder: Optional[str]) -> CtorPat:
    if cur.peek() == "(":
        cur.advance()
        cur.skip_space()
        inner = _parse_ctor(cur, binder=None)
        cur.skip_space()
        cur.expect(")")
        return CtorPat(inner.ctor, inner.args, binder=binder)
    name = cur.read_typeid()
    args: tuple[Pattern, ...] = ()
    if cur.peek() == "(":
        cur.advance()
        items: list[Pattern] = []
        while True:
            cur.skip_space()
            items.append(_parse_pattern(cur))
            cur.skip_space()
            if cur.peek() == ",":
                cur.advance()
                continue
            cur.expect(")")
            break
        args = tuple(items)
    return CtorPat(name, args, binder=binder)


def _parse_pattern(cur: _Cursor) -> Pattern:
    ch = cur.peek()
    if ch == "_":
        cur.advance()
        return Wildcard()
    if ch == '"':
        return LitStrPat(cur.read_string())
    if _is_digit(ch) or (ch == "-" and _is_digit(cur.peek(1))):
        num = cur.read_number()
        if isinstance(num, float):
            raise cur.error("patterns accept only integer literals")
        return LitIntPat(num)
    if ch == "(" or ch in _TYPEID_START:
        return _parse_ctor(cur, binder=None)
    if ch in _IDENT_START:
        name = cur.read_ident()
        if name == "xxx":
            return KeepOut()
        if cur.peek() == "@":
            cur.advance()
            return _parse_ctor(cur, binder=name)
        if cur.peek() == ":":
            cur.advance()
            return VarPat(name=name, datatype=cur.read_typeid())
        return VarPat(name=name)
    raise cur.error("expected a pattern")


def _parse_node_sel(cur: _Cursor) -> NodeSelector:
    if cur.peek() == ".":
        return NodeSelector(ClassBinding(None), _parse_classes(cur))
    if cur.peek() in _IDENT_START:
        save = cur.pos
        name = cur.read_ident()
        if name != "xxx" and cur.peek() == "@" and cur.peek(1) == ".":
            cur.advance()
            return NodeSelector(ClassBinding(name), _parse_classes(cur))
        cur.pos = save
    basic = _parse_pattern(cur)
    classes = _parse_classes(cur) if cur.peek() == "." else frozenset()
    return NodeSelector(basic, classes)


def _parse_selector(cur: _Cursor) -> PathSelector:
    head = _parse_node_sel(cur)
    tail: list[tuple[Combinator, NodeSelector]] = []
    while True:
        save = cur.pos
        cur.skip_space()
        ch = cur.peek()
        if ch in (">", "~", "+"):
            comb = {">": Combinator.CHILD, "~": Combinator.SUBSEQUENT_SIBLING, "+": Combinator.NEXT_SIBLING}[ch]
            cur.advance()
            cur.skip_space()
            tail.append((comb, _parse_node_sel(cur)))
        elif cur.pos > save and _looks_like_node_sel(cur):
            tail.append((Combinator.DESCENDANT, _parse_node_sel(cur)))
        else:
            cur.pos = save
            return PathSelector(head, tuple(tail))


# Predicate expressions, precedence climbing: || < && < comparisons/in < +- < */mod

def _parse_pred_expr(cur: _Cursor) -> P.PredicateExpr:
    return _parse_or(cur)


def _parse_or(cur: _Cursor) -> P.PredicateExpr:
    left = _parse_and(cur)
    while True:
        cur.skip_space()
        if cur.startswith("||"):
            cur.advance(2)
            cur.skip_space()
            left = P.Binary("||", left, _parse_and(cur))
        else:
            return left


def _parse_and(cur: _Cursor) -> P.PredicateExpr:
    left = _parse_comparison(cur)
    while True:
        cur.skip_space()
        if cur.startswith("&&"):
            cur.advance(2)
            cur.skip_space()
            left = P.Binary("&&", left, _parse_comparison(cur))
        else:
            return left


def _peek_word(cur: _Cursor) -> str:
    save = cur.pos
    word = cur.read_while(_IDENT_CHARS) if cur.peek() in _IDENT_START else ""
    cur.pos = save
    return word


def _parse_comparison(cur: _Cursor) -> P.PredicateExpr:
    left = _parse_additive(cur)
    cur.skip_space()
    for op in ("==", "/=", "<=", ">=", "<", ">"):
        if cur.startswith(op):
            # "->" would split as "-" ">"; selectors never reach here, and
            # comparison operands cannot start with ">", so plain prefix
            # matching is safe.
            cur.advance(len(op))
            cur.skip_space()
            return P.Binary(op, left, _parse_additive(cur))
    if _peek_word(cur) == "in":
        cur.advance(2)
        cur.skip_space()
        return P.InList(left, _parse_lit_list(cur))
    return left


def _parse_lit_list(cur: _Cursor) -> tuple[P.ScalarV, ...]:
    cur.expect("[")
    items: list[P.ScalarV] = []
    cur.skip_space()
    if cur.peek() == "]":
        cur.advance()
        return ()
    while True:
        cur.skip_space()
        items.append(_parse_literal(cur))
        cur.skip_space()
        if cur.peek() == ",":
            cur.advance()
            continue
        cur.expect("]")
        return tuple(items)


def _parse_literal(cur: _Cursor) -> P.ScalarV:
    ch = cur.peek()
    if ch == '"':
        return cur.read_string()
    word = _peek_word(cur)
    if word in ("true", "false"):
        cur.advance(len(word))
        return word == "true"
    return cur.read_number()


def _parse_additive(cur: _Cursor) -> P.PredicateExpr:
    left = _parse_multiplicative(cur)
    while True:
        cur.skip_space()
        ch = cur.peek()
        if ch == "+" or (ch == "-" and not cur.startswith("->")):
            cur.advance()
            cur.skip_space()
            left = P.Binary(ch, left, _parse_multiplicative(cur))
        else:
            return left


def _parse_multiplicative(cur: _Cursor) -> P.PredicateExpr:
    left = _parse_unary(cur)
    while True:
        cur.skip_space()
        if cur.peek() in ("*", "/") and not cur.startswith("/="):
            op = cur.peek()
            cur.advance()
            cur.skip_space()
            left = P.Binary(op, left, _parse_unary(cur))
        elif _peek_word(cur) == "mod":
            cur.advance(3)
            cur.skip_space()
            left = P.Binary("mod", left, _parse_unary(cur))
        else:
            return left


def _parse_unary(cur: _Cursor) -> P.PredicateExpr:
    cur.skip_space()
    if _peek_word(cur) == "not":
        cur.advance(3)
        cur.skip_space()
        return P.Unary("not", _parse_unary(cur))
    if cur.peek() == "-" and not _is_digit(cur.peek(1)):
        cur.advance()
        return P.Unary("-", _parse_unary(cur))
    return _parse_atom(cur)


def _parse_atom(cur: _Cursor) -> P.PredicateExpr:
    cur.skip_space()
    ch = cur.peek()
    if ch == "(":
        cur.advance()
        inner = _parse_pred_expr(cur)
        cur.skip_space()
        cur.expect(")")
        return inner
    if ch == '"':
        return P.Lit(cur.read_string())
    if _is_digit(ch) or (ch == "-" and _is_digit(cur.peek(1))):
        return P.Lit(cur.read_number())
    if ch in _IDENT_START:
        word = cur.read_ident()
        if word == "true":
            return P.Lit(True)
        if word == "false":
            return P.Lit(False)
        if word in P.ACCESSORS:
            cur.skip_space()
            cur.expect("(")
            cur.skip_space()
            var = cur.read_ident()
            key: Optional[str] = None
            cur.skip_space()
            if cur.peek() == ",":
                cur.advance()
                cur.skip_space()
                key = cur.read_string()
            cur.skip_space()
            cur.expect(")")
            if word in ("ann", "has_ann") and key is None:
                raise cur.error(f"{word} requires an annotation key")
            if word not in ("ann", "has_ann") and key is not None:
                raise cur.error(f"{word} takes a single variable argument")
            return P.Accessor(word, var, key)
        if word in _RESERVED:
            raise cur.error(f"unexpected keyword {word!r} in expression")
        return P.VarRef(word)
    raise cur.error("expected an expression")


_ATTR_CHARS = set("abcdefghijklmnopqrstuvwxyz-")


def _parse_styled_blocks(cur: _Cursor) -> list[tuple[str, StyleSet]]:
    """One or more `name+ { attr: value !prec; ... }` blocks.

    A block is only committed once its opening brace is seen; otherwise the
    cursor rewinds, since a following identifier may instead begin the next
    rule's selector.
    """
    blocks: list[tuple[str, StyleSet]] = []
    while True:
        save = cur.pos
        cur.skip_space()
        names: list[str] = []
        while cur.peek() in _IDENT_START and _peek_word(cur) not in _RESERVED:
            names.append(cur.read_ident())
            cur.skip_space()
        if not names or cur.peek() != "{":
            cur.pos = save
            break
        cur.advance()
        attrs: list[StyleAttr] = []
        while True:
            cur.skip_space()
            if cur.peek() == "}":
                cur.advance()
                break
            if cur.at_end():
                raise cur.error("unterminated style block")
            attr_start = cur.pos
            name = cur.read_while(_ATTR_CHARS)
            if not name:
                raise cur.error("expected a style attribute name")
            if not name[0].isalpha():
                cur.pos = attr_start
                raise cur.error(f"invalid style attribute name {name!r}")
            cur.skip_space()
            cur.expect(":")
            semi = cur.src.find(";", cur.pos)
            if semi < 0:
                raise cur.error("style attribute value must end with ';'")
            raw = cur.src[cur.pos : semi]
            cur.pos = semi + 1
            value, prec = _split_precedence(raw)
            if not value:
                raise cur.error(f"empty value for style attribute {name!r}")
            attrs.append(StyleAttr(name, value, prec))
        for n in names:
            blocks.append((n, frozenset(attrs)))
    if not blocks:
        raise cur.error("expected at least one styled block after '->'")
    return blocks


def _split_precedence(raw: str) -> tuple[str, int]:
    """Split a raw attribute value from its optional trailing `!INT`."""
    text = raw.strip()
    bang = text.rfind("!")
    if bang >= 0:
        suffix = text[bang + 1 :].strip()
        if suffix and all(c in _DIGITS for c in suffix):
            return text[:bang].strip(), int(suffix)
    return text, 0


def _parse_rule(cur: _Cursor) -> ExternalRule:
    line, _ = cur.line_col()
    selectors = [_parse_selector(cur)]
    while True:
        cur.skip_space()
        if cur.peek() == ",":
            cur.advance()
            cur.skip_space()
            selectors.append(_parse_selector(cur))
        else:
            break
    cur.skip_space()
    guard: Optional[P.PredicateExpr] = None
    if _peek_word(cur) == "if":
        cur.advance(2)
        cur.skip_space()
        guard = _parse_pred_expr(cur)
    cur.skip_space()
    if not cur.startswith("->"):
        raise cur.error("expected '->' between selector and style blocks")
    cur.advance(2)
    named: list[tuple[str, StyleSet]] = []
    for name, styles in _parse_styled_blocks(cur):
        for i, (n, existing) in enumerate(named):
            if n == name:
                named[i] = (n, existing | styles)
                break
        else:
            named.append((name, styles))
    return ExternalRule(tuple(selectors), guard, tuple(named), line)


def parse_stylesheet(text: str) -> ParseResult:
    """Parse stylesheet text into external rules. Syntax errors stop the
    parse and are reported as diagnostics with line/column."""
    cur = _Cursor(text)
    result = ParseResult()
    try:
        while True:
            cur.skip_space()
            if cur.at_end():
                break
            result.rules.append(_parse_rule(cur))
    except _SheetSyntaxError as exc:
        result.diagnostics.append(exc.diagnostic)
    return result


# ---------------------------------------------------------------------------
# Checking


def _pattern_bound_names(pat: Pattern) -> list[str]:
    if isinstance(pat, VarPat) and pat.name:
        return [pat.name]
    if isinstance(pat, CtorPat):
        names = [pat.binder] if pat.binder else []
        for arg in pat.args:
            names.extend(_pattern_bound_names(arg))
        return names
    return []


def selector_bound_names(sel: PathSelector) -> tuple[list[str], list[str]]:
    """(value-bound names, class-bound names) introduced by a selector."""
    value_names: list[str] = []
    class_names: list[str] = []
    for step in sel.steps():
        if isinstance(step.basic, ClassBinding):
            if step.basic.binder:
                class_names.append(step.basic.binder)
        elif isinstance(step.basic, Top):
            pass
        else:
            value_names.extend(_pattern_bound_names(step.basic))
    return value_names, class_names


def _check_pattern(
    pat: Pattern, registry: ConstructorRegistry, diags: list[Diagnostic], line: int
) -> None:
    if isinstance(pat, VarPat) and pat.datatype is not None:
        if pat.datatype not in registry.entries:
            diags.append(
                Diagnostic(
                    "error",
                    f"unknown datatype {pat.datatype!r} in typed variable pattern",
                    line,
                    0,
                    "unknown-datatype",
                )
            )
    if isinstance(pat, CtorPat):
        if not registry.knows(pat.ctor):
            diags.append(
                Diagnostic(
                    "error", f"unknown constructor {pat.ctor!r}", line, 0, "unknown-constructor"
                )
            )
        else:
            arity = registry.arity_of(pat.ctor)
            if arity is not None and len(pat.args) != arity:
                diags.append(
                    Diagnostic(
                        "error",
                        f"constructor {pat.ctor!r} expects {arity} argument(s), pattern has {len(pat.args)}",
                        line,
                        0,
                        "arity-mismatch",
                    )
                )
        for arg in pat.args:
            _check_pattern(arg, registry, diags, line)


def check_stylesheet(
    rules: list[ExternalRule], registry: ConstructorRegistry
) -> list[Diagnostic]:
    """Static checks: known constructors/arities, duplicate bindings, guard
    variables bound by every selector, style names bound by some selector."""
    diags: list[Diagnostic] = []
    for rule in rules:
        per_selector: list[set[str]] = []
        all_bound: set[str] = set()
        for sel in rule.selectors:
            value_names, class_names = selector_bound_names(sel)
            names = value_names + class_names
            seen: set[str] = set()
            for name in names:
                if name in seen:
                    diags.append(
                        Diagnostic(
                            "error",
                            f"variable {name!r} bound more than once in one selector",
                            rule.line,
                            0,
                            "duplicate-binding",
                        )
                    )
                seen.add(name)
            per_selector.append(set(value_names))
            all_bound.update(names)
            for step in sel.steps():
                if not isinstance(step.basic, (ClassBinding, Top)):
                    _check_pattern(step.basic, registry, diags, rule.line)
        if rule.guard is not None:
            for var in sorted(P.free_vars(rule.guard)):
                for bound in per_selector:
                    if var not in bound:
                        diags.append(
                            Diagnostic(
                                "error",
                                f"guard references {var!r}, which is not value-bound by every selector",
                                rule.line,
                                0,
                                "unbound-variable",
                            )
                        )
                        break
        for name, _styles in rule.named_styles:
            if name not in all_bound:
                diags.append(
                    Diagnostic(
                        "error",
                        f"style block names {name!r}, which no selector binds",
                        rule.line,
                        0,
                        "unbound-style-name",
                    )
                )
    return diags


# ---------------------------------------------------------------------------
# Desugaring: distribute named styles onto binding positions


def _desugar_pattern(pat: Pattern, rule: ExternalRule) -> IPattern:
    if isinstance(pat, Wildcard):
        return IWildcard()
    if isinstance(pat, KeepOut):
        return IKeepOut()
    if isinstance(pat, VarPat):
        styles = rule.styles_of(pat.name) if pat.name else EMPTY_STYLES
        return IVar(pat.name, pat.datatype, styles)
    if isinstance(pat, CtorPat):
        styles = rule.styles_of(pat.binder) if pat.binder else EMPTY_STYLES
        return ICtor(
            pat.ctor,
            tuple(_desugar_pattern(a, rule) for a in pat.args),
            pat.binder,
            styles,
        )
    if isinstance(pat, LitIntPat):
        return ILitInt(pat.value)
    if isinstance(pat, LitStrPat):
        return ILitStr(pat.value)
    raise TypeError(pat)


def _desugar_node_sel(sel: NodeSelector, rule: ExternalRule) -> INodeSelector:
    if isinstance(sel.basic, ClassBinding):
        styles = rule.styles_of(sel.basic.binder) if sel.basic.binder else EMPTY_STYLES
        return INodeSelector(IClassSel(sel.basic.binder, styles), sel.classes)
    if isinstance(sel.basic, Top):
        return INodeSelector(ITop(), sel.classes)
    return INodeSelector(_desugar_pattern(sel.basic, rule), sel.classes)


def desugar(rule: ExternalRule) -> list[InternalRule]:
    """One internal rule per selector-list member; each bound name's style
    set lands at its binding site (empty set when the rule styles a name the
    selector does not bind)."""
    out: list[InternalRule] = []
    guard = rule.guard if rule.guard is not None else P.TRUE
    for sel in rule.selectors:
        head = _desugar_node_sel(sel.head, rule)
        tail = tuple((comb, _desugar_node_sel(s, rule)) for comb, s in sel.tail)
        out.append(InternalRule(head, tail, guard, rule.line))
    return out


def desugar_sheet(rules: list[ExternalRule]) -> list[InternalRule]:
    out: list[InternalRule] = []
    for rule in rules:
        out.extend(desugar(rule))
    return out


# ---------------------------------------------------------------------------
# Pretty printing (canonical form; parse . format . parse is a fixpoint)


def format_pattern(pat: Pattern) -> str:
    if isinstance(pat, Wildcard):
        return "_"
    if isinstance(pat, KeepOut):
        return "xxx"
    if isinstance(pat, VarPat):
        if pat.name and pat.datatype:
            return f"{pat.name}:{pat.datatype}"
        if pat.name:
            return pat.name
        return "_" if not pat.datatype else f"_:{pat.datatype}"
    if isinstance(pat, CtorPat):
        args = f"({', '.join(format_pattern(a) for a in pat.args)})" if pat.args else ""
        core = f"{pat.ctor}{args}"
        return f"{pat.binder}@({core})" if pat.binder else core
    if isinstance(pat, LitIntPat):
        return str(pat.value)
    if isinstance(pat, LitStrPat):
        return P._quote(pat.value)
    raise TypeError(pat)


def format_node_sel(sel: NodeSelector) -> str:
    classes = "".join(f".{c}" for c in sorted(sel.classes))
    if isinstance(sel.basic, ClassBinding):
        prefix = f"{sel.basic.binder}@" if sel.basic.binder else ""
        return f"{prefix}{classes}"
    if isinstance(sel.basic, Top):
        raise ValueError("top selectors have no external syntax")
    return f"{format_pattern(sel.basic)}{classes}"


def format_selector(sel: PathSelector) -> str:
    parts = [format_node_sel(sel.head)]
    for comb, step in sel.tail:
        if comb is Combinator.DESCENDANT:
            parts.append(format_node_sel(step))
        else:
            parts.append(comb.value)
            parts.append(format_node_sel(step))
    return " ".join(parts)


def format_rule(rule: ExternalRule) -> str:
    selectors = ",\n".join(format_selector(s) for s in rule.selectors)
    guard = f" if {P.format_expr(rule.guard)}" if rule.guard is not None else ""
    blocks = []
    for name, styles in rule.named_styles:
        attrs = "".join(
            f"  {a.name}: {a.value}{f' !{a.precedence}' if a.precedence else ''};\n"
            for a in sorted(styles)
        )
        blocks.append(f"{name} {{\n{attrs}}}")
    return f"{selectors}{guard} ->\n" + "\n".join(blocks)


def format_stylesheet(rules: list[ExternalRule]) -> str:
    return "\n\n".join(format_rule(r) for r in rules) + "\n"
