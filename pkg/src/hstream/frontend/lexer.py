"""Tokenizer for the C-like host subset plus the stream pragma.

Comments and whitespace are consumed, never emitted. Positions are 1-based.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from hstream import errors
from hstream.errors import CompileError


class TokenKind(Enum):
    IDENT = "identifier"
    INT = "integer"
    FLOAT = "float"
    KEYWORD = "keyword"
    PUNCT = "punctuation"
    PRAGMA = "pragma"  # the `#pragma hstream` introducer


KEYWORDS = {"int", "double", "stream"}

# Single-character punctuation only; the grammar needs nothing longer.
PUNCT_CHARS = set(";,(){}[]:=+-*/<>")

_FLOAT_RE = re.compile(r"\d+\.\d+([eE][+-]?\d+)?")
_INT_RE = re.compile(r"\d+")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_WORD_RE = re.compile(r"[A-Za-z_]+")


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    line: int = field(compare=False)
    col: int = field(compare=False)

    def __repr__(self) -> str:
        return f"{self.kind.name}({self.lexeme!r})@{self.line}:{self.col}"


def lex(source: str) -> list[Token]:
    """Tokenize source text; raises CompileError on an illegal construct."""
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    n = len(source)

    def col() -> int:
        return pos - line_start + 1

    def error(code: str, message: str) -> CompileError:
        return CompileError.single(line, col(), code, message)

    while pos < n:
        ch = source[pos]

        if ch == "\n":
            pos += 1
            line += 1
            line_start = pos
            continue
        if ch in " \t\r":
            pos += 1
            continue

        if source.startswith("//", pos):
            nl = source.find("\n", pos)
            pos = n if nl < 0 else nl
            continue
        if source.startswith("/*", pos):
            end = source.find("*/", pos + 2)
            if end < 0:
                raise error(errors.SYNTAX, "unterminated block comment")
            for i in range(pos, end):
                if source[i] == "\n":
                    line += 1
                    line_start = i + 1
            pos = end + 2
            continue

        if ch == "#":
            start_col = col()
            m = _WORD_RE.match(source, pos + 1)
            if not m or m.group() != "pragma":
                raise error(errors.ILLEGAL_CHAR, "stray '#' (only '#pragma hstream' is recognized)")
            after = m.end()
            while after < n and source[after] in " \t":
                after += 1
            m2 = _WORD_RE.match(source, after)
            if not m2 or m2.group() != "hstream":
                got = m2.group() if m2 else "<end of line>"
                raise error(errors.BAD_PRAGMA, f"unsupported pragma '{got}'")
            tokens.append(Token(TokenKind.PRAGMA, "#pragma hstream", line, start_col))
            pos = m2.end()
            continue

        m = _FLOAT_RE.match(source, pos)
        if m:
            tokens.append(Token(TokenKind.FLOAT, m.group(), line, col()))
            pos = m.end()
            continue
        m = _INT_RE.match(source, pos)
        if m:
            tokens.append(Token(TokenKind.INT, m.group(), line, col()))
            pos = m.end()
            continue
        m = _IDENT_RE.match(source, pos)
        if m:
            word = m.group()
            kind = TokenKind.KEYWORD if word in KEYWORDS else TokenKind.IDENT
            tokens.append(Token(kind, word, line, col()))
            pos = m.end()
            continue
        if ch in PUNCT_CHARS:
            tokens.append(Token(TokenKind.PUNCT, ch, line, col()))
            pos += 1
            continue

        raise error(errors.ILLEGAL_CHAR, f"illegal character {ch!r}")

    return tokens
