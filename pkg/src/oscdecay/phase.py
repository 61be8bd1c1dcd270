"""Textual phase expressions.

Grammar (precedence ``^`` > unary minus > ``*`` > ``+``/``-``)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' exponent)?
    exponent := INT ('^' exponent)?          # right-associative
    atom   := INT | 'x' | 'y' | '(' expr ')'

Coefficients are integers or rational literals ``p/q``; ``/`` between
anything but two constants is rejected as non-polynomial, as are negative or
fractional exponents and floating-point literals.  Implicit multiplication
is not allowed.  ``format_phase`` emits the canonical form: terms in graded
lexicographic order (total degree descending, then x-degree descending),
and ``parse_phase(format_phase(P)) == P`` exactly.
"""
from __future__ import annotations

from fractions import Fraction

from .errors import NonPolynomialInput, PhaseSyntaxError, UnknownSymbol
from .poly import BivariatePolynomial

_OPS = set("+-*/^()")


class _Token:
    __slots__ = ("kind", "value", "pos")

    def __init__(self, kind, value, pos):
        self.kind = kind
        self.value = value
        self.pos = pos

    def __repr__(self):
        return f"_Token({self.kind!r}, {self.value!r}, {self.pos})"


def _tokenize(text: str) -> list[_Token]:
    tokens = []
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
            if j < n and text[j] == ".":
                raise NonPolynomialInput(
                    f"floating-point literal at position {i}; use rationals like 3/2"
                )
            tokens.append(_Token("int", int(text[i:j]), i))
            i = j
            continue
        if ch.isalpha():
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            name = text[i:j]
            if name not in ("x", "y"):
                raise UnknownSymbol(name, i)
            tokens.append(_Token("var", name, i))
            i = j
            continue
        if ch in _OPS:
            tokens.append(_Token(ch, ch, i))
            i += 1
            continue
        raise PhaseSyntaxError(f"unexpected character {ch!r}", i, expected=_OPS)
    tokens.append(_Token("end", None, n))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise PhaseSyntaxError(
                f"expected {kind!r}, found {tok.kind!r}", tok.pos, expected={kind}
            )
        return self.advance()

    # expr := term (('+'|'-') term)*
    def expr(self):
        value, const = self.term()
        while self.peek().kind in ("+", "-"):
            op = self.advance().kind
            rhs, rconst = self.term()
            value = value + rhs if op == "+" else value - rhs
            const = const and rconst
        return value, const

    # term := unary (('*'|'/') unary)*
    def term(self):
        value, const = self.unary()
        while self.peek().kind in ("*", "/"):
            op = self.advance()
            rhs, rconst = self.unary()
            if op.kind == "*":
                value = value * rhs
                const = const and rconst
            else:
                if not (const and rconst):
                    raise NonPolynomialInput(
                        f"division at position {op.pos} is only allowed between "
                        "constants (rational literals)"
                    )
                num = value.terms.get((0, 0), Fraction(0))
                den = rhs.terms.get((0, 0), Fraction(0))
                if den == 0:
                    raise NonPolynomialInput(f"division by zero at position {op.pos}")
                value = BivariatePolynomial.constant(num / den)
        return value, const

    # unary := '-' unary | power
    def unary(self):
        if self.peek().kind == "-":
            self.advance()
            value, const = self.unary()
            return -value, const
        return self.power()

    # power := atom ('^' exponent)?
    def power(self):
        value, const = self.atom()
        if self.peek().kind == "^":
            self.advance()
            exponent = self.exponent()
            value = value**exponent
        return value, const

    # exponent := INT ('^' exponent)?   (right-associative, integers only)
    def exponent(self) -> int:
        tok = self.peek()
        if tok.kind == "-":
            raise NonPolynomialInput(
                f"negative exponent at position {tok.pos}"
            )
        if tok.kind != "int":
            raise PhaseSyntaxError(
                "exponent must be a nonnegative integer literal",
                tok.pos,
                expected={"int"},
            )
        base = self.advance().value
        if self.peek().kind == "^":
            self.advance()
            return base ** self.exponent()
        return base

    # atom := INT | VAR | '(' expr ')'
    def atom(self):
        tok = self.peek()
        if tok.kind == "int":
            self.advance()
            return BivariatePolynomial.constant(tok.value), True
        if tok.kind == "var":
            self.advance()
            if tok.value == "x":
                return BivariatePolynomial.var_x(), False
            return BivariatePolynomial.var_y(), False
        if tok.kind == "(":
            self.advance()
            value, const = self.expr()
            self.expect(")")
            return value, const
        raise PhaseSyntaxError(
            f"expected a number, variable or '(', found {tok.kind!r}",
            tok.pos,
            expected={"int", "var", "("},
        )


def parse_phase(text: str) -> BivariatePolynomial:
    """Parse a phase expression into an exact bivariate polynomial."""
    if not text or not text.strip():
        raise PhaseSyntaxError("empty phase expression", 0, expected={"int", "var", "("})
    parser = _Parser(_tokenize(text))
    value, _ = parser.expr()
    tok = parser.peek()
    if tok.kind != "end":
        raise PhaseSyntaxError(
            f"unexpected {tok.kind!r} after complete expression",
            tok.pos,
            expected={"+", "-", "*", "^", "end"},
        )
    return value


def _monomial_text(k: int, l: int) -> str:
    parts = []
    if k == 1:
        parts.append("x")
    elif k > 1:
        parts.append(f"x^{k}")
    if l == 1:
        parts.append("y")
    elif l > 1:
        parts.append(f"y^{l}")
    return "*".join(parts)


def format_phase(P: BivariatePolynomial) -> str:
    """Canonical text for a polynomial; inverse of :func:`parse_phase`."""
    if P.is_zero():
        return "0"
    # graded lexicographic, x before y, leading terms first
    ordered = sorted(P.terms.items(), key=lambda item: (-(item[0][0] + item[0][1]), -item[0][0]))
    pieces = []
    for idx, ((k, l), c) in enumerate(ordered):
        mono = _monomial_text(k, l)
        mag = abs(c)
        if mono and mag == 1:
            body = mono
        elif mono:
            body = f"{mag}*{mono}"
        else:
            body = f"{mag}"
        if idx == 0:
            pieces.append(f"-{body}" if c < 0 else body)
        else:
            pieces.append(f" - {body}" if c < 0 else f" + {body}")
    return "".join(pieces)
