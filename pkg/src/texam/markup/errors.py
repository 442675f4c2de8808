"""Markup diagnostics carried by the tokenizer, parser and segmenter."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .source import SourcePos

SNIPPET_RADIUS = 20  # chars of context kept on each side of the error position


class ErrorKind(Enum):
    UNBALANCED_BRACE = "UnbalancedBrace"
    UNKNOWN_COMMAND = "UnknownCommand"
    DOUBLE_SCRIPT = "DoubleScript"
    UNTERMINATED_MATH = "UnterminatedMath"
    UNTERMINATED_ENVIRONMENT = "UnterminatedEnvironment"
    EMPTY_ARGUMENT = "EmptyArgument"
    BAD_COLUMN_SPEC = "BadColumnSpec"
    STRAY_CHARACTER = "StrayCharacter"


@dataclass(frozen=True)
class MarkupError(Exception):
    pos: SourcePos
    kind: ErrorKind
    message: str
    snippet: str = field(default="")

    def __str__(self) -> str:
        return f"{self.pos}: {self.message}"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "message": self.message,
            "offset": self.pos.offset,
            "line": self.pos.line,
            "column": self.pos.column,
            "snippet": self.snippet,
        }


def make_snippet(source: str, offset: int) -> str:
    """Up to 40 chars of source around `offset`, newlines flattened."""
    lo = max(0, offset - SNIPPET_RADIUS)
    hi = min(len(source), offset + SNIPPET_RADIUS)
    return source[lo:hi].replace("\n", " ")


def markup_error(source: str, pos: SourcePos, kind: ErrorKind, message: str) -> MarkupError:
    return MarkupError(pos, kind, message, make_snippet(source, pos.offset))
