"""Tokenizer shared by the term, formula, rules and model grammars."""

import re
from dataclasses import dataclass

from .errors import ParseError

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
   |(?P<string>"(?:[^"\\\n]|\\.)*")
   |(?P<ident>[A-Za-z_][A-Za-z0-9_]*)
   |(?P<int>[0-9]+)
   |(?P<op>->|\|-|=>|[(){}\[\],;:/?!&|])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident | int | string | op | eof
    text: str
    pos: int


def tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


class Lexer:
    """A cursor over a token list with one-token lookahead."""

    def __init__(self, text):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self, offset=0):
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def next(self):
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def at(self, text):
        tok = self.peek()
        return tok.kind in ("op", "ident") and tok.text == text

    def accept(self, text):
        if self.at(text):
            return self.next()
        return None

    def expect(self, text):
        tok = self.peek()
        if not self.at(text):
            shown = tok.text or "end of input"
            raise ParseError(f"expected {text!r}, found {shown!r}", self.text, tok.pos)
        return self.next()

    def expect_kind(self, kind, what=None):
        tok = self.peek()
        if tok.kind != kind:
            shown = tok.text or "end of input"
            raise ParseError(f"expected {what or kind}, found {shown!r}", self.text, tok.pos)
        return self.next()

    def error(self, message, tok=None):
        tok = tok or self.peek()
        return ParseError(message, self.text, tok.pos)

    def expect_eof(self):
        tok = self.peek()
        if tok.kind != "eof":
            raise ParseError(f"unexpected trailing input {tok.text!r}", self.text, tok.pos)


def unquote(tok):
    body = tok.text[1:-1]
    return re.sub(r"\\(.)", r"\1", body)


def quote(s):
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'
