"""Exact arithmetic over small integer expressions.

Grammar (whitespace ignored between tokens)::

    expr   := term (('+' | '-') term)*
    term   := factor (('×' | '*' | '÷' | '/') factor)*
    factor := INT | '(' expr ')'
    INT    := [0-9]+

Evaluation is exact (`fractions.Fraction`), so ``7÷2×4`` is 14 and
``1÷3×3`` is exactly 1.  The ASCII spellings ``*`` and ``/`` are accepted as
aliases for the typeset ``×`` and ``÷``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

__all__ = ["ExprError", "parse_expression"]

_ADD = {"+", "-"}
_MUL = {"×", "*", "÷", "/"}


class ExprError(ValueError):
    """Malformed expression; ``position`` is the 0-based offset of the fault."""

    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class _Token:
    kind: str  # "int" | "op" | "lparen" | "rparen" | "end"
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(_Token("int", text[i:j], i))
            i = j
        elif ch in _ADD or ch in _MUL:
            tokens.append(_Token("op", ch, i))
            i += 1
        elif ch == "(":
            tokens.append(_Token("lparen", ch, i))
            i += 1
        elif ch == ")":
            tokens.append(_Token("rparen", ch, i))
            i += 1
        else:
            raise ExprError(f"unexpected character {ch!r}", i)
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]) -> None:
        self.tokens = tokens
        self.i = 0

    @property
    def cur(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.cur
        self.i += 1
        return tok

    def parse(self) -> Fraction:
        value = self.expr()
        if self.cur.kind != "end":
            raise ExprError(f"unexpected {self.cur.text!r}", self.cur.pos)
        return value

    def expr(self) -> Fraction:
        value = self.term()
        while self.cur.kind == "op" and self.cur.text in _ADD:
            op = self.advance().text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> Fraction:
        value = self.factor()
        while self.cur.kind == "op" and self.cur.text in _MUL:
            tok = self.advance()
            rhs = self.factor()
            if tok.text in ("×", "*"):
                value = value * rhs
            else:
                if rhs == 0:
                    raise ExprError("division by zero", tok.pos)
                value = value / rhs
        return value

    def factor(self) -> Fraction:
        tok = self.cur
        if tok.kind == "int":
            self.advance()
            return Fraction(int(tok.text))
        if tok.kind == "lparen":
            self.advance()
            value = self.expr()
            if self.cur.kind != "rparen":
                raise ExprError("expected ')'", self.cur.pos)
            self.advance()
            return value
        raise ExprError(
            "expected a number or '('" if tok.kind != "end" else "unexpected end of input",
            tok.pos,
        )


def parse_expression(text: str) -> Fraction:
    """Parse and exactly evaluate an arithmetic expression.

    Raises :class:`ExprError` on malformed input or division by zero.
    """
    if not text or not text.strip():
        raise ExprError("empty expression", 0)
    return _Parser(_tokenize(text)).parse()
