"""Split mixed question text into text / math / code / table segments.

Segmentation is lossless: segment spans tile the source exactly, so
concatenating the source slices of all segments reproduces the input.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ErrorKind, MarkupError, markup_error
from .nodes import MathNode, Table
from .parser import parse_math, parse_table_body
from .source import LineMap, Span
from .tokens import Mode, tokenize

_BEGIN = "\\begin{"
_END = "\\end{"


@dataclass(frozen=True)
class Segment:
    source_span: Span


@dataclass(frozen=True)
class TextSegment(Segment):
    content: str = ""  # backslash-dollar escapes resolved to literal '$'


@dataclass(frozen=True)
class InlineMathSegment(Segment):
    node: MathNode = None  # type: ignore[assignment]


@dataclass(frozen=True)
class DisplayMathSegment(Segment):
    node: MathNode = None  # type: ignore[assignment]


@dataclass(frozen=True)
class CodeBlockSegment(Segment):
    content: str = ""  # verbatim, uninterpreted


@dataclass(frozen=True)
class TableBlockSegment(Segment):
    node: Table = None  # type: ignore[assignment]


@dataclass(frozen=True)
class Document:
    source: str
    segments: tuple[Segment, ...]


def _env_name_at(source: str, i: int) -> str | None:
    """The environment name if source[i:] starts with \\begin{name} or \\end{name}."""
    for marker in (_BEGIN, _END):
        if source.startswith(marker, i):
            close = source.find("}", i + len(marker))
            if close < 0:
                return None
            return source[i + len(marker) : close]
    return None


def _parse_math_region(source: str, lm: LineMap, start: int, end: int) -> MathNode:
    tokens = tokenize(source, Mode.MATH, start, end, lm)
    return parse_math(tokens, source, line_map=lm, region=(start, end))


def segment_document(source: str) -> Document:
    """Decompose `source` into ordered, non-overlapping segments.

    Raises MarkupError for unterminated math/environments and for any
    defect inside a math or table body, with document-absolute positions.
    """
    lm = LineMap(source)
    n = len(source)
    segments: list[Segment] = []

    text_start = 0      # where the current text segment's span began
    chunk_start = 0     # where the current literal run began
    parts: list[str] = []

    def flush_text(upto: int) -> None:
        nonlocal parts, chunk_start, text_start
        parts.append(source[chunk_start:upto])
        content = "".join(parts)
        if upto > text_start:
            segments.append(TextSegment(lm.span(text_start, upto), content))
        parts = []

    def begin_text(at: int) -> None:
        nonlocal text_start, chunk_start
        text_start = at
        chunk_start = at

    i = 0
    while i < n:
        ch = source[i]
        if ch == "$":
            flush_text(i)
            close = source.find("$", i + 1)
            if close < 0:
                # A defect inside the partial body is the more precise report.
                _parse_math_region(source, lm, i + 1, n)
                raise markup_error(source, lm.pos(i), ErrorKind.UNTERMINATED_MATH,
                                   "math opened by '$' is never closed")
            node = _parse_math_region(source, lm, i + 1, close)
            segments.append(InlineMathSegment(lm.span(i, close + 1), node))
            i = close + 1
            begin_text(i)
        elif ch == "\\" and source.startswith("\\$", i):
            parts.append(source[chunk_start:i])
            parts.append("$")
            i += 2
            chunk_start = i
        elif ch == "\\" and (env := _env_name_at(source, i)) is not None:
            if source.startswith(_END, i):
                raise markup_error(source, lm.pos(i), ErrorKind.UNBALANCED_BRACE,
                                   f"\\end{{{env}}} without a matching \\begin")
            if env not in ("equation", "verbatim", "tabular"):
                raise markup_error(source, lm.pos(i), ErrorKind.UNKNOWN_COMMAND,
                                   f"unsupported environment '{env}'")
            flush_text(i)
            i = _consume_environment(source, lm, segments, i, env)
            begin_text(i)
        else:
            i += 1
    flush_text(n)
    return Document(source, tuple(segments))


def _consume_environment(source: str, lm: LineMap, segments: list[Segment],
                         start: int, env: str) -> int:
    """Append the segment for the environment opening at `start`; return its end."""
    body_start = start + len(_BEGIN) + len(env) + 1
    colspec: tuple[str, ...] = ()
    if env == "tabular":
        body_start, colspec = _parse_colspec(source, lm, body_start)
    end_marker = _END + env + "}"
    close = source.find(end_marker, body_start)
    if close < 0:
        raise markup_error(source, lm.pos(start), ErrorKind.UNTERMINATED_ENVIRONMENT,
                           f"environment '{env}' is never closed")
    seg_end = close + len(end_marker)
    span = lm.span(start, seg_end)
    if env == "verbatim":
        segments.append(CodeBlockSegment(span, source[body_start:close]))
    elif env == "equation":
        node = _parse_math_region(source, lm, body_start, close)
        segments.append(DisplayMathSegment(span, node))
    else:
        table = parse_table_body(source, body_start, close, colspec, span,
                                 line_map=lm)
        segments.append(TableBlockSegment(span, table))
    return seg_end


def _parse_colspec(source: str, lm: LineMap, i: int) -> tuple[int, tuple[str, ...]]:
    if i >= len(source) or source[i] != "{":
        raise markup_error(source, lm.pos(min(i, len(source))), ErrorKind.BAD_COLUMN_SPEC,
                           "tabular needs a column spec such as {lcr}")
    close = source.find("}", i + 1)
    if close < 0:
        raise markup_error(source, lm.pos(i), ErrorKind.BAD_COLUMN_SPEC,
                           "column spec brace is never closed")
    spec = source[i + 1 : close]
    if not spec:
        raise markup_error(source, lm.pos(i), ErrorKind.BAD_COLUMN_SPEC,
                           "column spec is empty")
    for k, ch in enumerate(spec):
        if ch not in "lcr":
            raise markup_error(source, lm.pos(i + 1 + k), ErrorKind.BAD_COLUMN_SPEC,
                               f"column spec may only contain l, c, r; got {ch!r}")
    return close + 1, tuple(spec)
