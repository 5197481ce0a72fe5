from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import List

from ..errors import HarnessError


SYMBOL_PUNCT = set("~!@$%^&*_-+=<>.?/")


class LexError(HarnessError):
    code = 201

    def __init__(self, line: int, column: int, message: str) -> None:
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class TokenKind(enum.Enum):
    LPAREN = "("
    RPAREN = ")"
    SYMBOL = "symbol"
    NUMERAL = "numeral"
    DECIMAL = "decimal"
    HEX = "hex"
    BINARY = "binary"
    STRING = "string"
    KEYWORD = "keyword"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    value: str  # symbol name without bars, literal digits, string body
    raw: str  # exact source text
    line: int
    column: int
    offset: int


def is_simple_symbol_char(ch: str) -> bool:
    return ch.isascii() and (ch.isalnum() or ch in SYMBOL_PUNCT)


def is_simple_symbol(name: str) -> bool:
    return bool(name) and not name[0].isdigit() and all(is_simple_symbol_char(c) for c in name)


class _Cursor:
    def __init__(self, src: str) -> None:
        self.src = src
        self.pos = 0
        self.line = 1
        self.column = 1

    def peek(self, ahead: int = 0) -> str:
        index = self.pos + ahead
        return self.src[index] if index < len(self.src) else ""

    def advance(self) -> str:
        ch = self.src[self.pos]
        self.pos += 1
        if ch == "\n":
            self.line += 1
            self.column = 1
        else:
            self.column += 1
        return ch

    def fail(self, message: str) -> LexError:
        return LexError(self.line, self.column, message)


def tokenize(src: str) -> List[Token]:
    """Split SMT-LIB text into tokens; ``;`` comments and whitespace are dropped."""
    cur = _Cursor(src)
    tokens: List[Token] = []
    while cur.pos < len(src):
        ch = cur.peek()
        if ch in " \t\r\n":
            cur.advance()
            continue
        if ch == ";":
            while cur.pos < len(src) and cur.peek() != "\n":
                cur.advance()
            continue

        line, column, start = cur.line, cur.column, cur.pos
        if ch in "()":
            cur.advance()
            kind = TokenKind.LPAREN if ch == "(" else TokenKind.RPAREN
            tokens.append(Token(kind, ch, ch, line, column, start))
            continue

        if ch == '"':
            cur.advance()
            body: List[str] = []
            while True:
                if cur.pos >= len(src):
                    raise LexError(line, column, "unterminated string literal")
                c = cur.advance()
                if c == '"':
                    if cur.peek() == '"':
                        body.append(cur.advance())
                        continue
                    break
                body.append(c)
            tokens.append(Token(TokenKind.STRING, "".join(body), src[start : cur.pos], line, column, start))
            continue

        if ch == "|":
            cur.advance()
            while cur.pos < len(src) and cur.peek() != "|":
                if cur.peek() == "\\":
                    raise cur.fail("backslash is not allowed in a quoted symbol")
                cur.advance()
            if cur.pos >= len(src):
                raise LexError(line, column, "unterminated quoted symbol")
            cur.advance()
            raw = src[start : cur.pos]
            tokens.append(Token(TokenKind.SYMBOL, raw[1:-1], raw, line, column, start))
            continue

        if ch == "#":
            cur.advance()
            radix = cur.peek()
            digits = "0123456789abcdefABCDEF" if radix == "x" else "01" if radix == "b" else ""
            if not digits:
                raise LexError(line, column, "expected '#x' or '#b' literal")
            cur.advance()
            while cur.peek() and cur.peek() in digits:
                cur.advance()
            raw = src[start : cur.pos]
            if len(raw) == 2 or is_simple_symbol_char(cur.peek()):
                raise LexError(line, column, f"malformed bit-vector literal '{raw}{cur.peek()}'")
            kind = TokenKind.HEX if radix == "x" else TokenKind.BINARY
            tokens.append(Token(kind, raw[2:].lower(), raw, line, column, start))
            continue

        if ch.isascii() and ch.isdigit():
            while cur.peek().isascii() and cur.peek().isdigit():
                cur.advance()
            kind = TokenKind.NUMERAL
            if cur.peek() == "." and cur.peek(1).isascii() and cur.peek(1).isdigit():
                cur.advance()
                while cur.peek().isascii() and cur.peek().isdigit():
                    cur.advance()
                kind = TokenKind.DECIMAL
            raw = src[start : cur.pos]
            if is_simple_symbol_char(cur.peek()):
                raise LexError(line, column, f"malformed numeral '{raw}{cur.peek()}'")
            tokens.append(Token(kind, raw, raw, line, column, start))
            continue

        if ch == ":":
            cur.advance()
            while is_simple_symbol_char(cur.peek()):
                cur.advance()
            raw = src[start : cur.pos]
            if len(raw) == 1:
                raise LexError(line, column, "empty keyword")
            tokens.append(Token(TokenKind.KEYWORD, raw[1:], raw, line, column, start))
            continue

        if is_simple_symbol_char(ch):
            while is_simple_symbol_char(cur.peek()):
                cur.advance()
            raw = src[start : cur.pos]
            tokens.append(Token(TokenKind.SYMBOL, raw, raw, line, column, start))
            continue

        raise cur.fail(f"unexpected character {ch!r}")
    return tokens
