"""Tokenizer for the math/table markup subset.

Tokens tile the tokenized region exactly (whitespace included), so
concatenating token slices reproduces the source byte-for-byte.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import ErrorKind, markup_error
from .source import LineMap, Span


class Mode(Enum):
    MATH = "math"
    TABLE = "table"


class TokenKind(Enum):
    COMMAND = "Command"        # value: name after the backslash (ascii letters)
    LBRACE = "LBrace"
    RBRACE = "RBrace"
    CARET = "Caret"
    UNDERSCORE = "Underscore"
    AMPERSAND = "Ampersand"
    ROW_BREAK = "RowBreak"     # literal \\
    LETTER = "Letter"          # value: single alphabetic char
    DIGITS = "Digits"          # value: maximal ascii digit run
    OP_CHAR = "OpChar"         # value: single punctuation/symbol char
    WHITESPACE = "Whitespace"  # value: maximal whitespace run


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    value: str
    span: Span


_STRUCTURAL = {
    "{": TokenKind.LBRACE,
    "}": TokenKind.RBRACE,
    "^": TokenKind.CARET,
    "_": TokenKind.UNDERSCORE,
}


def _is_ascii_letter(ch: str) -> bool:
    return "a" <= ch <= "z" or "A" <= ch <= "Z"


def _is_ascii_digit(ch: str) -> bool:
    return "0" <= ch <= "9"


def tokenize(source: str, mode: Mode = Mode.MATH, start: int = 0,
             end: int | None = None, line_map: LineMap | None = None) -> list[Token]:
    """Tokenize source[start:end]; positions are absolute into `source`.

    Raises MarkupError (StrayCharacter) for control bytes, loose math
    delimiters, bad escapes, and `&` outside tables/environments.
    Unknown command names are accepted here and rejected by the parser.
    """
    if end is None:
        end = len(source)
    lm = line_map or LineMap(source)
    tokens: list[Token] = []
    env_depth = 0  # \begin…\end nesting; inside it, & separates cells
    i = start
    while i < end:
        ch = source[i]
        if ch == "\\":
            if i + 1 < end and source[i + 1] == "\\":
                tokens.append(Token(TokenKind.ROW_BREAK, "\\\\", lm.span(i, i + 2)))
                i += 2
                continue
            j = i + 1
            while j < end and _is_ascii_letter(source[j]):
                j += 1
            if j == i + 1:
                raise markup_error(source, lm.pos(i), ErrorKind.STRAY_CHARACTER,
                                   "lone backslash; expected a command name")
            name = source[i + 1 : j]
            if name == "begin":
                env_depth += 1
            elif name == "end":
                env_depth = max(0, env_depth - 1)
            tokens.append(Token(TokenKind.COMMAND, name, lm.span(i, j)))
            i = j
        elif ch in _STRUCTURAL:
            tokens.append(Token(_STRUCTURAL[ch], ch, lm.span(i, i + 1)))
            i += 1
        elif ch == "&":
            if mode is Mode.TABLE or env_depth > 0:
                tokens.append(Token(TokenKind.AMPERSAND, ch, lm.span(i, i + 1)))
                i += 1
            else:
                raise markup_error(source, lm.pos(i), ErrorKind.STRAY_CHARACTER,
                                   "'&' is only meaningful inside tables and matrices")
        elif ch == "$":
            raise markup_error(source, lm.pos(i), ErrorKind.STRAY_CHARACTER,
                               "'$' may not appear inside math mode")
        elif ch.isspace():
            j = i + 1
            while j < end and source[j].isspace():
                j += 1
            tokens.append(Token(TokenKind.WHITESPACE, source[i:j], lm.span(i, j)))
            i = j
        elif _is_ascii_digit(ch):
            j = i + 1
            while j < end and _is_ascii_digit(source[j]):
                j += 1
            tokens.append(Token(TokenKind.DIGITS, source[i:j], lm.span(i, j)))
            i = j
        elif ch.isalpha():
            tokens.append(Token(TokenKind.LETTER, ch, lm.span(i, i + 1)))
            i += 1
        elif ch.isprintable():
            tokens.append(Token(TokenKind.OP_CHAR, ch, lm.span(i, i + 1)))
            i += 1
        else:
            raise markup_error(source, lm.pos(i), ErrorKind.STRAY_CHARACTER,
                               f"unprintable character U+{ord(ch):04X}")
    return tokens
