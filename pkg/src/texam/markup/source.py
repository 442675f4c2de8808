"""Source positions and spans for markup diagnostics.

Offsets count Unicode code points into the source string (0-based);
line and column are 1-based, with column counted in code points.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class SourcePos:
    offset: int
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


@dataclass(frozen=True)
class Span:
    start: SourcePos
    end: SourcePos

    def slice(self, source: str) -> str:
        return source[self.start.offset : self.end.offset]

    def contains(self, other: "Span") -> bool:
        return (self.start.offset <= other.start.offset
                and other.end.offset <= self.end.offset)


class LineMap:
    """Precomputed line starts for O(log n) offset -> (line, column) lookup."""

    def __init__(self, source: str):
        self.source = source
        starts = [0]
        for i, ch in enumerate(source):
            if ch == "\n":
                starts.append(i + 1)
        self._starts = starts

    def pos(self, offset: int) -> SourcePos:
        if not 0 <= offset <= len(self.source):
            raise ValueError(f"offset {offset} outside source of length {len(self.source)}")
        line = bisect_right(self._starts, offset)
        column = offset - self._starts[line - 1] + 1
        return SourcePos(offset, line, column)

    def span(self, start: int, end: int) -> Span:
        return Span(self.pos(start), self.pos(end))
