"""Recursive-descent parser from token streams to math ASTs.

Grammar (whitespace tokens are skipped, spans keep them covered):

    seq      := scripted*
    scripted := atom ('^' arg | '_' arg){0..2, at most one of each}
    atom     := Letter | Digits | OpChar | group | command
    group    := '{' seq '}'
    command  := '\\frac' group group
              | '\\sqrt' ['[' seq ']'] group
              | '\\left' delim seq '\\right' delim
              | '\\begin{matrix}' rows '\\end{matrix}'
              | symbol-command

Scripts on a big operator fold into its lower/upper limits instead of
wrapping it in a Script node. Nesting is capped to keep parsing total
on adversarial input.
"""

from __future__ import annotations

from typing import Callable

from .errors import ErrorKind, MarkupError, markup_error
from .nodes import (BigOp, Delimited, Frac, Ident, MathNode, Num, Op, Root,
                    Row, Script, Symbol, Table)
from .source import LineMap, Span
from .symbols import SymbolClass, symbol_lookup
from .tokens import Mode, Token, TokenKind, tokenize

MAX_DEPTH = 64

_DELIMS = set("()[]|/.")

_STRUCTURAL_COMMANDS = {"frac", "sqrt", "left", "right", "begin", "end"}


class _Parser:
    def __init__(self, tokens: list[Token], source: str, region: tuple[int, int] | None,
                 line_map: LineMap | None = None):
        self.tokens = [t for t in tokens if t.kind is not TokenKind.WHITESPACE]
        self.source = source
        self.lm = line_map or LineMap(source)
        if region is not None:
            self.region = region
        elif tokens:
            self.region = (tokens[0].span.start.offset, tokens[-1].span.end.offset)
        else:
            self.region = (0, 0)
        self.i = 0
        self.depth = 0

    # -- token helpers -------------------------------------------------

    def peek(self) -> Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self) -> Token | None:
        tok = self.peek()
        if tok is not None:
            self.i += 1
        return tok

    def at_end_pos(self):
        return self.lm.pos(self.region[1])

    def error(self, pos, kind: ErrorKind, message: str) -> MarkupError:
        return markup_error(self.source, pos, kind, message)

    def _enter(self, tok: Token):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise self.error(tok.span.start, ErrorKind.UNBALANCED_BRACE,
                             f"markup nested deeper than {MAX_DEPTH} levels")

    def _leave(self):
        self.depth -= 1

    # -- grammar -------------------------------------------------------

    def parse_seq(self, stop: Callable[[Token], bool] | None = None) -> list[MathNode]:
        items: list[MathNode] = []
        while True:
            tok = self.peek()
            if tok is None or (stop is not None and stop(tok)):
                return items
            items.append(self.parse_scripted())

    def parse_scripted(self) -> MathNode:
        node = self.parse_atom()
        has_sub = has_sup = False
        while True:
            tok = self.peek()
            if tok is None or tok.kind not in (TokenKind.CARET, TokenKind.UNDERSCORE):
                break
            self.next()
            is_sup = tok.kind is TokenKind.CARET
            which = "superscript" if is_sup else "subscript"
            if (is_sup and has_sup) or (not is_sup and has_sub):
                raise self.error(tok.span.start, ErrorKind.DOUBLE_SCRIPT,
                                 f"double {which}: base already has one")
            arg = self.parse_script_arg(tok)
            span = Span(node.span.start, arg.span.end)
            if isinstance(node, BigOp):
                node = BigOp(span, node.name, node.char,
                             upper=arg if is_sup else node.upper,
                             lower=node.lower if is_sup else arg)
            elif isinstance(node, Script):
                node = Script(span, node.base,
                              sub=node.sub if is_sup else arg,
                              sup=arg if is_sup else node.sup)
            else:
                node = Script(span, node,
                              sub=None if is_sup else arg,
                              sup=arg if is_sup else None)
            if is_sup:
                has_sup = True
            else:
                has_sub = True
        return node

    def parse_script_arg(self, marker: Token) -> MathNode:
        tok = self.peek()
        if tok is None:
            raise self.error(marker.span.start, ErrorKind.EMPTY_ARGUMENT,
                             f"'{marker.value}' has no argument")
        self._enter(tok)
        try:
            return self.parse_argument_atom(tok, f"after '{marker.value}'")
        finally:
            self._leave()

    def parse_argument_atom(self, tok: Token, context: str) -> MathNode:
        """An atom in argument position; empty groups are rejected."""
        if tok.kind is TokenKind.LBRACE:
            node = self.parse_group()
            if isinstance(node, Row) and not node.items:
                raise self.error(tok.span.start, ErrorKind.EMPTY_ARGUMENT,
                                 f"empty argument {context}")
            return node
        return self.parse_atom()

    def parse_atom(self) -> MathNode:
        tok = self.peek()
        if tok is None:
            raise self.error(self.at_end_pos(), ErrorKind.EMPTY_ARGUMENT,
                             "expected an expression")
        if tok.kind is TokenKind.LETTER:
            self.next()
            return Ident(tok.span, tok.value)
        if tok.kind is TokenKind.DIGITS:
            self.next()
            return Num(tok.span, tok.value)
        if tok.kind is TokenKind.OP_CHAR:
            self.next()
            return Op(tok.span, tok.value)
        if tok.kind is TokenKind.LBRACE:
            return self.parse_group()
        if tok.kind is TokenKind.COMMAND:
            return self.parse_command()
        if tok.kind is TokenKind.RBRACE:
            raise self.error(tok.span.start, ErrorKind.UNBALANCED_BRACE,
                             "unmatched closing brace")
        if tok.kind is TokenKind.CARET or tok.kind is TokenKind.UNDERSCORE:
            raise self.error(tok.span.start, ErrorKind.STRAY_CHARACTER,
                             f"'{tok.value}' needs a base expression before it")
        if tok.kind is TokenKind.AMPERSAND:
            raise self.error(tok.span.start, ErrorKind.STRAY_CHARACTER,
                             "'&' is only meaningful between table cells")
        if tok.kind is TokenKind.ROW_BREAK:
            raise self.error(tok.span.start, ErrorKind.STRAY_CHARACTER,
                             "'\\\\' is only meaningful between table rows")
        raise self.error(tok.span.start, ErrorKind.STRAY_CHARACTER,
                         f"unexpected {tok.kind.value} token")

    def parse_group(self) -> MathNode:
        lbrace = self.next()
        assert lbrace is not None and lbrace.kind is TokenKind.LBRACE
        self._enter(lbrace)
        try:
            items = self.parse_seq(lambda t: t.kind is TokenKind.RBRACE)
        finally:
            self._leave()
        closer = self.peek()
        if closer is None or closer.kind is not TokenKind.RBRACE:
            raise self.error(lbrace.span.start, ErrorKind.UNBALANCED_BRACE,
                             "unmatched opening brace")
        self.next()
        if len(items) == 1:
            return items[0]
        return Row(Span(lbrace.span.start, closer.span.end), tuple(items))

    def parse_command(self) -> MathNode:
        tok = self.next()
        assert tok is not None and tok.kind is TokenKind.COMMAND
        name = tok.value
        if name == "frac":
            return self.parse_frac(tok)
        if name == "sqrt":
            return self.parse_sqrt(tok)
        if name == "left":
            return self.parse_delimited(tok)
        if name == "begin":
            return self.parse_environment(tok)
        if name == "right":
            raise self.error(tok.span.start, ErrorKind.UNBALANCED_BRACE,
                             "\\right without a matching \\left")
        if name == "end":
            raise self.error(tok.span.start, ErrorKind.UNBALANCED_BRACE,
                             "\\end without a matching \\begin")
        info = symbol_lookup(name)
        if info is None:
            raise self.error(tok.span.start, ErrorKind.UNKNOWN_COMMAND,
                             f"unknown command \\{name}")
        if info.cls is SymbolClass.BIGOP:
            return BigOp(tok.span, info.name, info.char)
        return Symbol(tok.span, info.name, info.char,
                      is_letter=info.cls is SymbolClass.LETTER)

    def parse_required_group(self, cmd: Token, what: str) -> MathNode:
        tok = self.peek()
        if tok is None or tok.kind is not TokenKind.LBRACE:
            pos = tok.span.start if tok is not None else self.at_end_pos()
            raise self.error(pos, ErrorKind.EMPTY_ARGUMENT,
                             f"\\{cmd.value} expects a braced {what}")
        self._enter(tok)
        try:
            node = self.parse_group()
        finally:
            self._leave()
        if isinstance(node, Row) and not node.items:
            raise self.error(tok.span.start, ErrorKind.EMPTY_ARGUMENT,
                             f"empty {what} in \\{cmd.value}")
        return node

    def parse_frac(self, cmd: Token) -> MathNode:
        numerator = self.parse_required_group(cmd, "numerator")
        denominator = self.parse_required_group(cmd, "denominator")
        return Frac(Span(cmd.span.start, denominator.span.end), numerator, denominator)

    def parse_sqrt(self, cmd: Token) -> MathNode:
        degree: MathNode | None = None
        tok = self.peek()
        if tok is not None and tok.kind is TokenKind.OP_CHAR and tok.value == "[":
            opener = self.next()
            assert opener is not None
            self._enter(opener)
            try:
                items = self.parse_seq(
                    lambda t: t.kind is TokenKind.OP_CHAR and t.value == "]")
            finally:
                self._leave()
            closer = self.peek()
            if closer is None:
                raise self.error(opener.span.start, ErrorKind.UNBALANCED_BRACE,
                                 "unmatched '[' in \\sqrt degree")
            self.next()
            if not items:
                raise self.error(opener.span.start, ErrorKind.EMPTY_ARGUMENT,
                                 "empty degree in \\sqrt[]")
            degree = items[0] if len(items) == 1 else Row(
                Span(opener.span.start, closer.span.end), tuple(items))
        radicand = self.parse_required_group(cmd, "radicand")
        return Root(Span(cmd.span.start, radicand.span.end), radicand, degree)

    def parse_delim_char(self, side: str) -> tuple[str, Token]:
        tok = self.peek()
        if (tok is None or tok.kind is not TokenKind.OP_CHAR
                or tok.value not in _DELIMS):
            pos = tok.span.start if tok is not None else self.at_end_pos()
            raise self.error(pos, ErrorKind.STRAY_CHARACTER,
                             f"\\{side} expects a delimiter, one of ( ) [ ] | / .")
        self.next()
        return tok.value, tok

    def parse_delimited(self, cmd: Token) -> MathNode:
        left, _ = self.parse_delim_char("left")
        self._enter(cmd)
        try:
            items = self.parse_seq(
                lambda t: t.kind is TokenKind.COMMAND and t.value == "right")
        finally:
            self._leave()
        closer = self.peek()
        if closer is None:
            raise self.error(cmd.span.start, ErrorKind.UNBALANCED_BRACE,
                             "\\left without a matching \\right")
        self.next()
        right, right_tok = self.parse_delim_char("right")
        body_span = (Span(items[0].span.start, items[-1].span.end) if items
                     else Span(closer.span.start, closer.span.start))
        body = items[0] if len(items) == 1 else Row(body_span, tuple(items))
        return Delimited(Span(cmd.span.start, right_tok.span.end), left, body, right)

    def parse_env_name(self, cmd: Token) -> str:
        lbrace = self.peek()
        if lbrace is None or lbrace.kind is not TokenKind.LBRACE:
            raise self.error(cmd.span.start, ErrorKind.EMPTY_ARGUMENT,
                             f"\\{cmd.value} expects a braced environment name")
        self.next()
        letters = []
        while (tok := self.peek()) is not None and tok.kind is TokenKind.LETTER:
            letters.append(tok.value)
            self.next()
        closer = self.peek()
        if closer is None or closer.kind is not TokenKind.RBRACE:
            raise self.error(lbrace.span.start, ErrorKind.UNBALANCED_BRACE,
                             "unmatched opening brace")
        self.next()
        return "".join(letters)

    def parse_environment(self, cmd: Token) -> MathNode:
        name = self.parse_env_name(cmd)
        if name != "matrix":
            raise self.error(cmd.span.start, ErrorKind.UNKNOWN_COMMAND,
                             f"unsupported environment '{name}' in math mode")
        self._enter(cmd)
        try:
            rows, end_tok = self.parse_rows(cmd, name)
        finally:
            self._leave()
        width = max((len(r) for r in rows), default=0)
        colspec = ("c",) * width
        return Table(Span(cmd.span.start, end_tok.span.end), colspec, tuple(rows))

    def parse_rows(self, cmd: Token, env_name: str,
                   colspec: tuple[str, ...] | None = None):
        """Rows separated by \\\\, cells by &, until \\end{env_name}.

        With an explicit colspec, rows wider than it are rejected.
        """
        def cell_stop(t: Token) -> bool:
            return (t.kind in (TokenKind.AMPERSAND, TokenKind.ROW_BREAK)
                    or (t.kind is TokenKind.COMMAND and t.value == "end"))

        rows: list[tuple[MathNode, ...]] = []
        row: list[MathNode] = []
        while True:
            tok = self.peek()
            if tok is None:
                raise self.error(cmd.span.start, ErrorKind.UNTERMINATED_ENVIRONMENT,
                                 f"environment '{env_name}' is never closed")
            cell_start = tok.span.start
            items = self.parse_seq(cell_stop)
            cell_span = (Span(items[0].span.start, items[-1].span.end) if items
                         else Span(cell_start, cell_start))
            cell = items[0] if len(items) == 1 else Row(cell_span, tuple(items))
            row.append(cell)
            if colspec is not None and len(row) > len(colspec):
                raise self.error(cell_span.start, ErrorKind.BAD_COLUMN_SPEC,
                                 f"row has more cells than the {len(colspec)}-column spec")
            tok = self.peek()
            if tok is None:
                raise self.error(cmd.span.start, ErrorKind.UNTERMINATED_ENVIRONMENT,
                                 f"environment '{env_name}' is never closed")
            if tok.kind is TokenKind.AMPERSAND:
                self.next()
                continue
            if tok.kind is TokenKind.ROW_BREAK:
                self.next()
                rows.append(tuple(row))
                row = []
                continue
            # \end
            end_tok = tok
            self.next()
            closing = self.parse_env_name(end_tok)
            if closing != env_name:
                raise self.error(end_tok.span.start, ErrorKind.UNTERMINATED_ENVIRONMENT,
                                 f"\\end{{{closing}}} closes nothing; "
                                 f"expected \\end{{{env_name}}}")
            is_blank_trailing = (len(row) == 1 and isinstance(row[0], Row)
                                 and not row[0].items)
            if not is_blank_trailing:
                rows.append(tuple(row))
            return rows, end_tok


def parse_math(tokens: list[Token], source: str, *,
               line_map: LineMap | None = None,
               region: tuple[int, int] | None = None) -> MathNode:
    """Parse a math-mode token stream into a single MathNode.

    Multiple top-level atoms come back as a Row; an empty stream is an
    empty Row. Raises MarkupError with the position of the defect.
    """
    p = _Parser(tokens, source, region, line_map)
    items = p.parse_seq()
    if (tok := p.peek()) is not None:
        raise p.error(tok.span.start, ErrorKind.STRAY_CHARACTER,
                      f"unexpected {tok.kind.value} token")
    if len(items) == 1:
        return items[0]
    if items:
        span = Span(items[0].span.start, items[-1].span.end)
    else:
        lm = p.lm
        span = Span(lm.pos(p.region[0]), lm.pos(p.region[1]))
    return Row(span, tuple(items))


def parse_table_body(source: str, start: int, end: int, colspec: tuple[str, ...],
                     span: Span, *, line_map: LineMap | None = None) -> Table:
    """Parse a tabular body (already stripped of \\begin/\\end) into a Table.

    `span` is the full environment span the resulting Table node covers.
    """
    lm = line_map or LineMap(source)
    tokens = tokenize(source, Mode.TABLE, start, end, lm)
    p = _Parser(tokens, source, (start, end), lm)

    def cell_stop(t: Token) -> bool:
        return t.kind in (TokenKind.AMPERSAND, TokenKind.ROW_BREAK)

    rows: list[tuple[MathNode, ...]] = []
    row: list[MathNode] = []
    while True:
        tok = p.peek()
        cell_start = tok.span.start if tok is not None else lm.pos(end)
        items = p.parse_seq(cell_stop)
        cell_span = (Span(items[0].span.start, items[-1].span.end) if items
                     else Span(cell_start, cell_start))
        cell = items[0] if len(items) == 1 else Row(cell_span, tuple(items))
        row.append(cell)
        if len(row) > len(colspec):
            raise p.error(cell_span.start, ErrorKind.BAD_COLUMN_SPEC,
                          f"row has more cells than the {len(colspec)}-column spec")
        tok = p.peek()
        if tok is None:
            is_blank_trailing = (len(row) == 1 and isinstance(row[0], Row)
                                 and not row[0].items)
            if not is_blank_trailing:
                rows.append(tuple(row))
            return Table(span, colspec, tuple(rows))
        if tok.kind is TokenKind.AMPERSAND:
            p.next()
            continue
        if tok.kind is TokenKind.ROW_BREAK:
            p.next()
            rows.append(tuple(row))
            row = []
            continue
        raise p.error(tok.span.start, ErrorKind.STRAY_CHARACTER,
                      f"unexpected {tok.kind.value} token in table body")


def compile_math(source: str) -> MathNode:
    """Tokenize and parse a standalone math expression."""
    lm = LineMap(source)
    return parse_math(tokenize(source, Mode.MATH, line_map=lm), source,
                      line_map=lm, region=(0, len(source)))
