"""Render parsed documents and math trees to HTML with MathML Core.

The output dialect is the module's public contract (see docs/markup.md):
standard flow elements (<p>, <pre><code>) plus <math> subtrees, nothing
else. Rendering is deterministic; identical input gives identical bytes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .hashing import content_hash64
from .nodes import (BigOp, Delimited, Frac, Ident, MathNode, Num, Op, Root,
                    Row, Script, Symbol, Table)
from .segment import (CodeBlockSegment, DisplayMathSegment, Document,
                      InlineMathSegment, TableBlockSegment, TextSegment,
                      segment_document)

RENDERER_VERSION = 1

_PARA_BREAK = re.compile(r"\n\s*\n")

_ALIGN = {"l": "left", "c": "center", "r": "right"}


@dataclass(frozen=True)
class RenderedFragment:
    html: str
    source_hash: int
    renderer_version: int


def escape_text(s: str) -> str:
    """Escape &, <, >, and double quotes; everything else passes through.

    Not idempotent: escaping twice double-escapes, so escape exactly once.
    """
    return (s.replace("&", "&amp;")
             .replace("<", "&lt;")
             .replace(">", "&gt;")
             .replace('"', "&quot;"))


def render_math_node(node: MathNode, display: bool) -> str:
    mode = "block" if display else "inline"
    return f'<math display="{mode}">{_render(node, display)}</math>'


def _render(node: MathNode, display: bool) -> str:
    if isinstance(node, Row):
        return "<mrow>" + "".join(_render(c, display) for c in node.items) + "</mrow>"
    if isinstance(node, Ident):
        return f"<mi>{escape_text(node.char)}</mi>"
    if isinstance(node, Num):
        return f"<mn>{escape_text(node.text)}</mn>"
    if isinstance(node, Op):
        return f"<mo>{escape_text(node.char)}</mo>"
    if isinstance(node, Symbol):
        tag = "mi" if node.is_letter else "mo"
        return f"<{tag}>{escape_text(node.char)}</{tag}>"
    if isinstance(node, Frac):
        return ("<mfrac>" + _render(node.numerator, display)
                + _render(node.denominator, display) + "</mfrac>")
    if isinstance(node, Root):
        if node.degree is None:
            return "<msqrt>" + _render(node.radicand, display) + "</msqrt>"
        return ("<mroot>" + _render(node.radicand, display)
                + _render(node.degree, display) + "</mroot>")
    if isinstance(node, Script):
        base = _render(node.base, display)
        if node.sub is not None and node.sup is not None:
            return ("<msubsup>" + base + _render(node.sub, display)
                    + _render(node.sup, display) + "</msubsup>")
        if node.sub is not None:
            return "<msub>" + base + _render(node.sub, display) + "</msub>"
        assert node.sup is not None
        return "<msup>" + base + _render(node.sup, display) + "</msup>"
    if isinstance(node, BigOp):
        return _render_big_op(node, display)
    if isinstance(node, Delimited):
        pieces = ["<mrow>"]
        if node.left != ".":
            pieces.append(f'<mo stretchy="true">{escape_text(node.left)}</mo>')
        pieces.append(_render(node.body, display))
        if node.right != ".":
            pieces.append(f'<mo stretchy="true">{escape_text(node.right)}</mo>')
        pieces.append("</mrow>")
        return "".join(pieces)
    if isinstance(node, Table):
        return _render_table(node, display)
    raise TypeError(f"unrenderable node {type(node).__name__}")


def _render_big_op(node: BigOp, display: bool) -> str:
    op = f"<mo>{escape_text(node.char)}</mo>"
    lower = _render(node.lower, display) if node.lower is not None else None
    upper = _render(node.upper, display) if node.upper is not None else None
    if lower is None and upper is None:
        return op
    if display:
        both, under, over = "munderover", "munder", "mover"
    else:
        both, under, over = "msubsup", "msub", "msup"
    if lower is not None and upper is not None:
        return f"<{both}>{op}{lower}{upper}</{both}>"
    if lower is not None:
        return f"<{under}>{op}{lower}</{under}>"
    return f"<{over}>{op}{upper}</{over}>"


def _render_table(node: Table, display: bool) -> str:
    if node.colspec:
        align = " ".join(_ALIGN[c] for c in node.colspec)
        pieces = [f'<mtable columnalign="{align}">']
    else:
        pieces = ["<mtable>"]
    width = len(node.colspec) or max((len(r) for r in node.rows), default=0)
    for row in node.rows:
        pieces.append("<mtr>")
        for cell in row:
            pieces.append("<mtd>" + _render(cell, display) + "</mtd>")
        for _ in range(width - len(row)):
            pieces.append("<mtd></mtd>")  # short rows pad on the right
        pieces.append("</mtr>")
    pieces.append("</mtable>")
    return "".join(pieces)


def render_document(doc: Document) -> RenderedFragment:
    """Render a segmented document to an HTML fragment.

    Text flows in <p> paragraphs (blank lines split paragraphs, inline
    math stays in flow); display math, code blocks, and tables are
    emitted between paragraphs.
    """
    blocks: list[str] = []
    para: list[str] = []
    para_has_content = False

    def close_para() -> None:
        nonlocal para, para_has_content
        if para_has_content:
            blocks.append("<p>" + "".join(para) + "</p>")
        para = []
        para_has_content = False

    for seg in doc.segments:
        if isinstance(seg, TextSegment):
            chunks = _PARA_BREAK.split(seg.content)
            for k, chunk in enumerate(chunks):
                if k > 0:
                    close_para()
                if chunk:
                    para.append(escape_text(chunk))
                    if chunk.strip():
                        para_has_content = True
        elif isinstance(seg, InlineMathSegment):
            para.append(render_math_node(seg.node, display=False))
            para_has_content = True
        elif isinstance(seg, DisplayMathSegment):
            close_para()
            blocks.append(render_math_node(seg.node, display=True))
        elif isinstance(seg, CodeBlockSegment):
            close_para()
            blocks.append("<pre><code>" + escape_text(seg.content) + "</code></pre>")
        elif isinstance(seg, TableBlockSegment):
            close_para()
            blocks.append(render_math_node(seg.node, display=True))
        else:
            raise TypeError(f"unrenderable segment {type(seg).__name__}")
    close_para()
    return RenderedFragment("\n".join(blocks), content_hash64(doc.source),
                            RENDERER_VERSION)


def render_source(source: str) -> RenderedFragment:
    """Segment, parse, and render in one step. Raises MarkupError."""
    return render_document(segment_document(source))

