"""AST for parsed math expressions.

Every node carries the source span it covers; child spans nest inside
their parent's span.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .source import Span


@dataclass(frozen=True)
class MathNode:
    span: Span

    def children(self) -> tuple["MathNode", ...]:
        return ()


@dataclass(frozen=True)
class Row(MathNode):
    items: tuple[MathNode, ...] = ()

    def children(self) -> tuple[MathNode, ...]:
        return self.items


@dataclass(frozen=True)
class Ident(MathNode):
    char: str = ""


@dataclass(frozen=True)
class Num(MathNode):
    text: str = ""


@dataclass(frozen=True)
class Op(MathNode):
    char: str = ""


@dataclass(frozen=True)
class Symbol(MathNode):
    name: str = ""
    char: str = ""
    is_letter: bool = True  # letter class renders <mi>, operator class <mo>


@dataclass(frozen=True)
class Frac(MathNode):
    numerator: MathNode = None  # type: ignore[assignment]
    denominator: MathNode = None  # type: ignore[assignment]

    def children(self) -> tuple[MathNode, ...]:
        return (self.numerator, self.denominator)


@dataclass(frozen=True)
class Root(MathNode):
    radicand: MathNode = None  # type: ignore[assignment]
    degree: MathNode | None = None

    def children(self) -> tuple[MathNode, ...]:
        if self.degree is None:
            return (self.radicand,)
        return (self.radicand, self.degree)


@dataclass(frozen=True)
class Script(MathNode):
    base: MathNode = None  # type: ignore[assignment]
    sub: MathNode | None = None
    sup: MathNode | None = None

    def children(self) -> tuple[MathNode, ...]:
        return tuple(n for n in (self.base, self.sub, self.sup) if n is not None)


@dataclass(frozen=True)
class BigOp(MathNode):
    name: str = ""
    char: str = ""
    lower: MathNode | None = None
    upper: MathNode | None = None

    def children(self) -> tuple[MathNode, ...]:
        return tuple(n for n in (self.lower, self.upper) if n is not None)


@dataclass(frozen=True)
class Delimited(MathNode):
    left: str = "("
    body: MathNode = None  # type: ignore[assignment]
    right: str = ")"

    def children(self) -> tuple[MathNode, ...]:
        return (self.body,)


@dataclass(frozen=True)
class Table(MathNode):
    colspec: tuple[str, ...] = ()  # per-column alignment: l, c, or r
    rows: tuple[tuple[MathNode, ...], ...] = field(default=())

    def children(self) -> tuple[MathNode, ...]:
        return tuple(cell for row in self.rows for cell in row)


def walk(node: MathNode):
    """Yield `node` and all descendants, depth-first."""
    yield node
    for child in node.children():
        yield from walk(child)
