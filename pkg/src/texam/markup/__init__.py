"""Markup compiler: TeX-subset source -> tokens -> AST -> HTML/MathML."""

from .errors import ErrorKind, MarkupError
from .hashing import content_hash64
from .nodes import (BigOp, Delimited, Frac, Ident, MathNode, Num, Op, Root,
                    Row, Script, Symbol, Table, walk)
from .parser import MAX_DEPTH, compile_math, parse_math
from .render import (RENDERER_VERSION, RenderedFragment, escape_text,
                     render_document, render_math_node, render_source)
from .segment import (CodeBlockSegment, DisplayMathSegment, Document,
                      InlineMathSegment, Segment, TableBlockSegment,
                      TextSegment, segment_document)
from .source import LineMap, SourcePos, Span
from .symbols import SymbolClass, SymbolInfo, symbol_lookup
from .tokens import Mode, Token, TokenKind, tokenize

__all__ = [
    "BigOp", "CodeBlockSegment", "Delimited", "DisplayMathSegment", "Document",
    "ErrorKind", "Frac", "Ident", "InlineMathSegment", "LineMap", "MAX_DEPTH",
    "MarkupError", "MathNode", "Mode", "Num", "Op", "RENDERER_VERSION",
    "RenderedFragment", "Root", "Row", "Script", "Segment", "SourcePos", "Span",
    "Symbol", "SymbolClass", "SymbolInfo", "Table", "TableBlockSegment",
    "TextSegment", "Token", "TokenKind", "compile_math", "content_hash64",
    "escape_text", "parse_math", "render_document", "render_math_node",
    "render_source", "segment_document", "symbol_lookup", "tokenize", "walk",
]
