"""Name resolution and the counting interpreter for Tiny programs.

Both analyses decorate the value tree with annotations and leave everything
else untouched: name resolution adds ``binder_id`` to binding identifiers
and ``use_of`` (or ``unbound``) to usages; the tracer adds ``eval_count``
and ``eval_pct`` to every expression node.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

from .tiny import EXP_CTORS
from .values import Path, Scalar, Value

DEFAULT_FUEL = 100_000


def _ident_name(ident: Value) -> str:
    assert ident.ctor == "Ident" and ident.children
    token = ident.children[0].token
    assert token is not None
    return token


def _annotate(root: Value, extra: dict[Path, dict[str, Scalar]]) -> Value:
    """Rebuild the tree with per-path annotation additions."""

    def go(v: Value, path: Path) -> Value:
        children = tuple(go(c, path + (i,)) for i, c in enumerate(v.children, start=1))
        ann = extra.get(path)
        if ann:
            merged = dict(v.ann)
            merged.update(ann)
            return Value(v.ctor, children, v.token, merged)
        if children == v.children:
            return v
        return Value(v.ctor, children, v.token, v.ann)

    return go(root, ())


def resolve_names(root: Value) -> Value:
    """Annotate binding identifiers with fresh ``binder_id``s and usages with
    ``use_of``; free variables get ``unbound: true``. Scoping is lexical:
    top-level equations are mutually visible, lambda parameters and (non-
    recursive) let bindings shadow outer bindings."""
    extra: dict[Path, dict[str, Scalar]] = {}
    next_id = [0]

    def fresh() -> int:
        binder = next_id[0]
        next_id[0] += 1
        return binder

    # Top-level pass: one binder per distinct equation name; repeated
    # equations for one name share its id.
    top: dict[str, int] = {}
    for i, decl in enumerate(root.children, start=1):
        if decl.ctor == "Equation":
            name = _ident_name(decl.children[0])
            if name not in top:
                top[name] = fresh()
            extra[(i, 1)] = {"binder_id": top[name]}

    def use(ident_path: Path, name: str, env: dict[str, int]) -> None:
        if name in env:
            extra[ident_path] = {"use_of": env[name]}
        else:
            extra[ident_path] = {"unbound": True}

    def walk(v: Value, path: Path, env: dict[str, int]) -> None:
        if v.ctor == "EVar":
            use(path + (1,), _ident_name(v.children[0]), env)
            return
        if v.ctor == "ELam":
            params, body = v.children
            inner = dict(env)
            for j, param in enumerate(params.children, start=1):
                binder = fresh()
                extra[path + (1, j)] = {"binder_id": binder}
                inner[_ident_name(param)] = binder
            walk(body, path + (2,), inner)
            return
        if v.ctor == "ELet":
            name_ident, rhs, body = v.children
            walk(rhs, path + (2,), env)
            binder = fresh()
            extra[path + (1,)] = {"binder_id": binder}
            inner = dict(env)
            inner[_ident_name(name_ident)] = binder
            walk(body, path + (3,), inner)
            return
        for i, child in enumerate(v.children, start=1):
            walk(child, path + (i,), env)

    for i, decl in enumerate(root.children, start=1):
        if decl.ctor == "Equation":
            _name, params, body = decl.children
            env = dict(top)
            for j, param in enumerate(params.children, start=1):
                binder = fresh()
                extra[(i, 2, j)] = {"binder_id": binder}
                env[_ident_name(param)] = binder
            walk(body, (i, 3), env)
        elif decl.ctor == "Signature":
            # A signature's name refers to the equation it describes.
            use((i, 1), _ident_name(decl.children[0]), top)

    return _annotate(root, extra)


# ---------------------------------------------------------------------------
# Counting interpreter


class RuntimeErrorTiny(Exception):
    pass


class FuelExhausted(Exception):
    pass


@dataclass
class Closure:
    params: list[str]
    body: Value
    body_path: Path
    env: dict[str, "RtVal"]


@dataclass
class Builtin:
    name: str
    fn: Callable[["RtVal"], "RtVal"]


@dataclass
class Composed:
    outer: "RtVal"
    inner: "RtVal"


RtVal = Union[int, str, bool, list, Closure, Builtin, Composed]


@dataclass
class TraceResult:
    root: Value
    counts: dict[Path, int]
    value: Optional[RtVal] = None
    error: Optional[str] = None
    steps: int = 0


def _string_value(token: str) -> str:
    """Lexeme to runtime string: strip quotes, process escapes."""
    body = token[1:-1]
    out: list[str] = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            out.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(body[i + 1], body[i + 1]))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _builtin_not(x: RtVal) -> RtVal:
    if not isinstance(x, bool):
        raise RuntimeErrorTiny("not expects a boolean")
    return not x


def _builtin_length(x: RtVal) -> RtVal:
    if isinstance(x, (str, list)):
        return len(x)
    raise RuntimeErrorTiny("length expects a string or list")


BUILTINS: dict[str, Builtin] = {
    "not": Builtin("not", _builtin_not),
    "length": Builtin("length", _builtin_length),
}


def trace_eval(root: Value, entry: str = "main", fuel: int = DEFAULT_FUEL) -> TraceResult:
    """Call-by-value evaluation starting at the ``entry`` equation, counting
    visits to every expression node. ``&&`` and ``||`` short-circuit, so a
    skipped operand is not counted. Counts survive runtime errors and fuel
    exhaustion; eval_pct normalizes to the hottest expression."""
    equations: dict[str, tuple[Value, Path]] = {}
    for i, decl in enumerate(root.children, start=1):
        if decl.ctor == "Equation":
            name = _ident_name(decl.children[0])
            equations.setdefault(name, (decl, (i,)))

    counts: dict[Path, int] = {}
    remaining = [fuel]

    def spend(path: Path) -> None:
        counts[path] = counts.get(path, 0) + 1
        remaining[0] -= 1
        if remaining[0] < 0:
            raise FuelExhausted()

    def call_equation(name: str) -> RtVal:
        decl, decl_path = equations[name]
        _ident, params, body = decl.children
        param_names = [_ident_name(p) for p in params.children]
        if param_names:
            return Closure(param_names, body, decl_path + (3,), {})
        return evaluate(body, decl_path + (3,), {})

    def apply(fn: RtVal, arg: RtVal) -> RtVal:
        if isinstance(fn, Closure):
            env = dict(fn.env)
            env[fn.params[0]] = arg
            rest = fn.params[1:]
            if rest:
                return Closure(rest, fn.body, fn.body_path, env)
            return evaluate(fn.body, fn.body_path, env)
        if isinstance(fn, Builtin):
            return fn.fn(arg)
        if isinstance(fn, Composed):
            return apply(fn.outer, apply(fn.inner, arg))
        raise RuntimeErrorTiny(f"cannot apply non-function value {fn!r}")

    def binop(op: str, left: RtVal, right: RtVal) -> RtVal:
        if op in ("+", "-", "*", "/"):
            if not (isinstance(left, int) and isinstance(right, int)) or isinstance(
                left, bool
            ) or isinstance(right, bool):
                raise RuntimeErrorTiny(f"{op} expects integers")
            if op == "+":
                return left + right
            if op == "-":
                return left - right
            if op == "*":
                return left * right
            if right == 0:
                raise RuntimeErrorTiny("division by zero")
            return left // right
        if op in ("==", "/=", "<", "<=", ">", ">="):
            if type(left) is not type(right):
                raise RuntimeErrorTiny(f"{op} expects operands of one type")
            if op == "==":
                return left == right
            if op == "/=":
                return left != right
            if isinstance(left, bool) or isinstance(left, (Closure, Builtin, Composed)):
                raise RuntimeErrorTiny(f"{op} expects ordered operands")
            if op == "<":
                return left < right
            if op == "<=":
                return left <= right
            if op == ">":
                return left > right
            return left >= right
        if op == "++":
            if isinstance(left, str) and isinstance(right, str):
                return left + right
            if isinstance(left, list) and isinstance(right, list):
                return left + right
            raise RuntimeErrorTiny("++ expects two strings or two lists")
        if op == ":":
            if not isinstance(right, list):
                raise RuntimeErrorTiny(": expects a list on the right")
            return [left] + right
        if op == "$":
            return apply(left, right)
        if op == ".":
            return Composed(left, right)
        raise RuntimeErrorTiny(f"unsupported operator {op!r}")

    def evaluate(exp: Value, path: Path, env: dict[str, RtVal]) -> RtVal:
        spend(path)
        ctor = exp.ctor
        if ctor == "EInt":
            token = exp.children[0].token
            assert token is not None
            return int(token)
        if ctor == "EString":
            token = exp.children[0].token
            assert token is not None
            return _string_value(token)
        if ctor == "EVar":
            name = _ident_name(exp.children[0])
            if name in env:
                return env[name]
            if name in equations:
                return call_equation(name)
            if name in BUILTINS:
                return BUILTINS[name]
            raise RuntimeErrorTiny(f"unbound variable {name!r}")
        if ctor == "EParen":
            return evaluate(exp.children[0], path + (1,), env)
        if ctor == "EList":
            return [
                evaluate(c, path + (i,), env) for i, c in enumerate(exp.children, start=1)
            ]
        if ctor == "ELam":
            params, body = exp.children
            names = [_ident_name(p) for p in params.children]
            return Closure(names, body, path + (2,), dict(env))
        if ctor == "ELet":
            name_ident, rhs, body = exp.children
            bound = evaluate(rhs, path + (2,), env)
            inner = dict(env)
            inner[_ident_name(name_ident)] = bound
            return evaluate(body, path + (3,), inner)
        if ctor == "EApp":
            fn = evaluate(exp.children[0], path + (1,), env)
            arg = evaluate(exp.children[1], path + (2,), env)
            return apply(fn, arg)
        if ctor == "EBinop":
            left_e, op_v, right_e = exp.children
            op_token = op_v.children[0].token
            assert op_token is not None
            if op_token in ("&&", "||"):
                left = evaluate(left_e, path + (1,), env)
                if not isinstance(left, bool):
                    raise RuntimeErrorTiny(f"{op_token} expects booleans")
                if op_token == "&&" and not left:
                    return False
                if op_token == "||" and left:
                    return True
                right = evaluate(right_e, path + (3,), env)
                if not isinstance(right, bool):
                    raise RuntimeErrorTiny(f"{op_token} expects booleans")
                return right
            left = evaluate(left_e, path + (1,), env)
            right = evaluate(right_e, path + (3,), env)
            return binop(op_token, left, right)
        raise RuntimeErrorTiny(f"cannot evaluate {ctor}")

    result = TraceResult(root, counts)
    if entry not in equations:
        result.error = f"entry equation {entry!r} not found"
    else:
        try:
            result.value = call_equation(entry)
        except RuntimeErrorTiny as exc:
            result.error = str(exc)
        except FuelExhausted:
            result.error = f"fuel exhausted after {fuel} steps"
        except RecursionError:
            result.error = "recursion depth exceeded"
    result.steps = fuel - remaining[0]

    max_count = max(counts.values(), default=0)
    extra: dict[Path, dict[str, Scalar]] = {}
    for p, v in root.walk():
        if v.ctor in EXP_CTORS:
            count = counts.get(p, 0)
            pct = count / max_count if max_count else 0.0
            extra[p] = {"eval_count": count, "eval_pct": pct}
    result.root = _annotate(root, extra)
    return result
