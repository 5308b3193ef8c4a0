"""Closed predicate expressions evaluated over selector-bound values.

Guards are boolean expressions over variables bound by a rule's selector.
The language is deliberately small: literals, arithmetic, comparisons,
boolean connectives, list membership, and a handful of accessors that peek
at the bound value (constructor name, token text, annotations, child count).

Evaluation is strict except that ``&&`` and ``||`` short-circuit. Comparing
values of mismatched runtime types raises :class:`EvalError`; the engine
treats that as "rule does not match" and records a diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

from .values import Path, Value

ValueEnv = Mapping[str, tuple[Value, Path]]

ScalarV = Union[int, float, str, bool]

ACCESSORS = ("ctor_of", "token_of", "ann", "has_ann", "child_count")

COMPARISON_OPS = ("==", "/=", "<", "<=", ">", ">=")
ARITH_OPS = ("+", "-", "*", "/", "mod")
BOOL_OPS = ("&&", "||")


class EvalError(Exception):
    """A runtime type error or missing datum during guard evaluation."""


@dataclass(frozen=True)
class Lit:
    value: ScalarV


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # "not" | "-"
    operand: "PredicateExpr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "PredicateExpr"
    right: "PredicateExpr"


@dataclass(frozen=True)
class InList:
    item: "PredicateExpr"
    options: tuple[ScalarV, ...]


@dataclass(frozen=True)
class Accessor:
    fn: str
    var: str
    key: str | None = None  # only for ann/has_ann


PredicateExpr = Union[Lit, VarRef, Unary, Binary, InList, Accessor]

TRUE = Lit(True)


def free_vars(expr: PredicateExpr) -> set[str]:
    if isinstance(expr, Lit):
        return set()
    if isinstance(expr, VarRef):
        return {expr.name}
    if isinstance(expr, Unary):
        return free_vars(expr.operand)
    if isinstance(expr, Binary):
        return free_vars(expr.left) | free_vars(expr.right)
    if isinstance(expr, InList):
        return free_vars(expr.item)
    if isinstance(expr, Accessor):
        return {expr.var}
    raise TypeError(expr)


def _coerce_value(value: Value) -> ScalarV:
    """Scalar view of a bound value: a leaf's token, parsed as an integer when
    it looks like one. Non-leaf values have no scalar form."""
    if value.token is None:
        raise EvalError(
            f"value {value.ctor!r} has no scalar form (only leaves can be compared)"
        )
    token = value.token
    try:
        return int(token)
    except ValueError:
        return token


def token_of(value: Value) -> str:
    """Token of a leaf, descending through single-child wrappers so that
    e.g. an operator node wrapping its symbol still answers the symbol."""
    node = value
    while node.token is None and len(node.children) == 1:
        node = node.children[0]
    if node.token is None:
        raise EvalError(f"value {value.ctor!r} has no token")
    return node.token


def _is_number(x: ScalarV) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _same_family(a: ScalarV, b: ScalarV) -> bool:
    if _is_number(a) and _is_number(b):
        return True
    if isinstance(a, bool) and isinstance(b, bool):
        return True
    return isinstance(a, str) and isinstance(b, str)


def _compare(op: str, a: ScalarV, b: ScalarV) -> bool:
    if not _same_family(a, b):
        raise EvalError(f"cannot compare {a!r} and {b!r} with {op}")
    if op == "==":
        return a == b
    if op == "/=":
        return a != b
    if isinstance(a, bool):
        raise EvalError(f"booleans are not ordered ({op})")
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise EvalError(f"unknown comparison {op!r}")


def _arith(op: str, a: ScalarV, b: ScalarV) -> ScalarV:
    if op == "+" and isinstance(a, str) and isinstance(b, str):
        return a + b
    if not (_is_number(a) and _is_number(b)):
        raise EvalError(f"{op} expects numbers, got {a!r} and {b!r}")
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0:
            raise EvalError("division by zero")
        return a / b
    if op == "mod":
        if b == 0:
            raise EvalError("mod by zero")
        return a % b
    raise EvalError(f"unknown operator {op!r}")


def _lookup(env: ValueEnv, name: str) -> tuple[Value, Path]:
    try:
        return env[name]
    except KeyError:
        raise EvalError(f"variable {name!r} is not bound by the selector") from None


def eval_expr(env: ValueEnv, expr: PredicateExpr) -> ScalarV:
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, VarRef):
        value, _ = _lookup(env, expr.name)
        return _coerce_value(value)
    if isinstance(expr, Accessor):
        value, _ = _lookup(env, expr.var)
        if expr.fn == "ctor_of":
            return value.ctor
        if expr.fn == "token_of":
            return token_of(value)
        if expr.fn == "child_count":
            return len(value.children)
        if expr.fn == "has_ann":
            assert expr.key is not None
            return expr.key in value.ann
        if expr.fn == "ann":
            assert expr.key is not None
            if expr.key not in value.ann:
                raise EvalError(f"value {value.ctor!r} has no annotation {expr.key!r}")
            return value.ann[expr.key]
        raise EvalError(f"unknown accessor {expr.fn!r}")
    if isinstance(expr, Unary):
        operand = eval_expr(env, expr.operand)
        if expr.op == "not":
            if not isinstance(operand, bool):
                raise EvalError(f"not expects a boolean, got {operand!r}")
            return not operand
        if expr.op == "-":
            if not _is_number(operand):
                raise EvalError(f"unary - expects a number, got {operand!r}")
            return -operand
        raise EvalError(f"unknown unary operator {expr.op!r}")
    if isinstance(expr, InList):
        item = eval_expr(env, expr.item)
        return any(_same_family(item, opt) and item == opt for opt in expr.options)
    if isinstance(expr, Binary):
        if expr.op in BOOL_OPS:
            left = eval_expr(env, expr.left)
            if not isinstance(left, bool):
                raise EvalError(f"{expr.op} expects booleans, got {left!r}")
            if expr.op == "&&" and not left:
                return False
            if expr.op == "||" and left:
                return True
            right = eval_expr(env, expr.right)
            if not isinstance(right, bool):
                raise EvalError(f"{expr.op} expects booleans, got {right!r}")
            return right
        left = eval_expr(env, expr.left)
        right = eval_expr(env, expr.right)
        if expr.op in COMPARISON_OPS:
            return _compare(expr.op, left, right)
        if expr.op in ARITH_OPS:
            return _arith(expr.op, left, right)
        raise EvalError(f"unknown operator {expr.op!r}")
    raise TypeError(expr)


def eval_predicate(env: ValueEnv, expr: PredicateExpr) -> bool:
    """Evaluate a guard to a boolean; any other result type is an error."""
    result = eval_expr(env, expr)
    if not isinstance(result, bool):
        raise EvalError(f"guard evaluated to non-boolean {result!r}")
    return result


def format_expr(expr: PredicateExpr) -> str:
    """Render an expression back to concrete syntax (fully parenthesized
    where nesting could be ambiguous; reparsing yields an equal tree)."""
    if isinstance(expr, Lit):
        if isinstance(expr.value, bool):
            return "true" if expr.value else "false"
        if isinstance(expr.value, str):
            return _quote(expr.value)
        return repr(expr.value)
    if isinstance(expr, VarRef):
        return expr.name
    if isinstance(expr, Accessor):
        if expr.key is not None:
            return f"{expr.fn}({expr.var}, {_quote(expr.key)})"
        return f"{expr.fn}({expr.var})"
    if isinstance(expr, Unary):
        if expr.op == "not":
            return f"not ({format_expr(expr.operand)})"
        return f"-({format_expr(expr.operand)})"
    if isinstance(expr, InList):
        opts = ", ".join(
            _quote(o) if isinstance(o, str) else ("true" if o is True else "false" if o is False else repr(o))
            for o in expr.options
        )
        return f"({format_expr(expr.item)}) in [{opts}]"
    if isinstance(expr, Binary):
        return f"({format_expr(expr.left)}) {expr.op} ({format_expr(expr.right)})"
    raise TypeError(expr)


def _quote(s: str) -> str:
    escaped = s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{escaped}"'
