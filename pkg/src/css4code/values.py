"""Generic constructor-tree values, provenance paths, and constructor metadata.

A ``Value`` represents any algebraic-data value (typically an AST) as a tree
of named constructors. Leaves may carry a token: the concrete text the value
prints as. Annotations hold per-node analysis results (scalars only), so they
stay serializable and usable from selector predicates.

Paths are 1-based child-index lists locating a subvalue from the root; an
empty path denotes the root itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Union

Scalar = Union[str, int, float, bool]

Path = tuple[int, ...]

ROOT_PATH: Path = ()


@dataclass(frozen=True)
class Value:
    """One constructor application; a leaf when it carries a token."""

    ctor: str
    children: tuple["Value", ...] = ()
    token: Optional[str] = None
    ann: Mapping[str, Scalar] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.ctor:
            raise ValueError("constructor name must be non-empty")
        if self.token is not None and self.children:
            raise ValueError("a value with children cannot carry a token")

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def with_ann(self, extra: Mapping[str, Scalar]) -> "Value":
        merged = dict(self.ann)
        merged.update(extra)
        return Value(self.ctor, self.children, self.token, merged)

    def walk(self, prefix: Path = ROOT_PATH) -> Iterator[tuple[Path, "Value"]]:
        """Yield (path, subvalue) pairs in preorder."""
        yield prefix, self
        for i, child in enumerate(self.children, start=1):
            yield from child.walk(prefix + (i,))


def path_apply(path: Path, root: Value) -> Optional[Value]:
    """Follow 1-based child indices from ``root``; None when any index is out
    of range. Absence is the only error signal (callers treat it as no-match).
    """
    node = root
    for idx in path:
        if idx < 1 or idx > len(node.children):
            return None
        node = node.children[idx - 1]
    return node


def path_extend(path: Path, index: int) -> Path:
    if index < 1:
        raise ValueError("child indices are 1-based")
    return path + (index,)


def is_prefix(a: Path, b: Path) -> bool:
    return len(a) <= len(b) and b[: len(a)] == a


# Arity None marks a variadic constructor (encodes source-level lists, so the
# 1-based path examples for list elements hold literally).
Arity = Optional[int]


@dataclass
class ConstructorRegistry:
    """Maps datatype names to their constructors and arities.

    Each constructor name belongs to exactly one datatype; the registry is
    what typed variable patterns and arity checks consult.
    """

    entries: dict[str, dict[str, Arity]] = field(default_factory=dict)

    def add(self, datatype: str, ctor: str, arity: Arity) -> None:
        owner = self.datatype_of(ctor)
        if owner is not None and owner != datatype:
            raise ValueError(f"constructor {ctor!r} already registered under {owner!r}")
        self.entries.setdefault(datatype, {})[ctor] = arity

    def datatype_of(self, ctor: str) -> Optional[str]:
        for datatype, ctors in self.entries.items():
            if ctor in ctors:
                return datatype
        return None

    def arity_of(self, ctor: str) -> Optional[Arity]:
        """Arity of a known constructor; None for variadic. Raises KeyError
        when the constructor is unknown."""
        for ctors in self.entries.values():
            if ctor in ctors:
                return ctors[ctor]
        raise KeyError(ctor)

    def knows(self, ctor: str) -> bool:
        return self.datatype_of(ctor) is not None


def registry_lookup(registry: ConstructorRegistry, datatype: str) -> set[str]:
    """Constructor set for a datatype; empty for unknown datatypes."""
    return set(registry.entries.get(datatype, {}))


def value_to_json(value: Value) -> dict:
    """JSON form: {"ctor", "children", "token"?, "ann"}."""
    out: dict = {"ctor": value.ctor, "children": [value_to_json(c) for c in value.children]}
    if value.token is not None:
        out["token"] = value.token
    out["ann"] = dict(value.ann)
    return out


def value_from_json(data: dict) -> Value:
    return Value(
        ctor=data["ctor"],
        children=tuple(value_from_json(c) for c in data.get("children", [])),
        token=data.get("token"),
        ann=data.get("ann", {}),
    )
