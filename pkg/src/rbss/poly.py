"""Sparse multivariate polynomials and rational functions over Q.

Variables are integer indices (machine coordinates, or input positions for
symbolic paths). A monomial is a sorted tuple of ``(index, exponent)``
pairs; a polynomial maps monomials to nonzero Fraction coefficients.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Mapping

from .scalar import format_rational, parse_rational

__all__ = ["Poly", "RationalFn", "parse_expr", "ExprError"]

Monomial = tuple


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    powers = dict(a)
    for var, exp in b:
        powers[var] = powers.get(var, 0) + exp
    return tuple(sorted(powers.items()))


class Poly:
    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, Fraction] | None = None) -> None:
        self.terms = {m: Fraction(c) for m, c in (terms or {}).items() if c != 0}

    @classmethod
    def const(cls, c) -> Poly:
        return cls({(): Fraction(c)})

    @classmethod
    def var(cls, index: int) -> Poly:
        return cls({((index, 1),): Fraction(1)})

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return all(m == () for m in self.terms)

    def const_value(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def variables(self) -> set[int]:
        return {v for m in self.terms for v, _ in m}

    def __add__(self, other: Poly) -> Poly:
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Poly(out)

    def __neg__(self) -> Poly:
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: Poly) -> Poly:
        return self + (-other)

    def __mul__(self, other: Poly) -> Poly:
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return Poly(out)

    def __pow__(self, n: int) -> Poly:
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def evaluate(self, point: Mapping[int, Fraction]) -> Fraction:
        total = Fraction(0)
        for m, c in self.terms.items():
            term = c
            for var, exp in m:
                value = point.get(var, 0)
                if value == 0:
                    term = 0
                    break
                term *= value**exp
            total += term
        return total

    def substitute(self, images: Mapping[int, "RationalFn"]) -> "RationalFn":
        """Compose with rational functions; unmapped variables are kept."""
        total = RationalFn(Poly())
        for m, c in self.terms.items():
            term = RationalFn(Poly.const(c))
            for var, exp in m:
                image = images.get(var)
                if image is None:
                    image = RationalFn(Poly.var(var))
                term = term * image**exp
            total = total + term
        return total

    def __repr__(self) -> str:
        return f"Poly({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=lambda m: (-sum(e for _, e in m), m)):
            c = self.terms[m]
            names = [(f"x{v}" if v >= 0 else f"x[{v}]", e) for v, e in m]
            factors = [n if e == 1 else f"{n}^{e}" for n, e in names]
            if not factors:
                parts.append(format_rational(c))
            elif c == 1:
                parts.append("*".join(factors))
            elif c == -1:
                parts.append("-" + "*".join(factors))
            else:
                parts.append(format_rational(c) + "*" + "*".join(factors))
        return " + ".join(parts).replace("+ -", "- ")


class RationalFn:
    """``num / den`` without cancellation, so vanishing intermediate
    denominators stay visible after composition."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None) -> None:
        if den is None:
            den = Poly.const(1)
        if den.is_zero():
            raise ZeroDivisionError("denominator is identically zero")
        if den.is_const() and den.const_value() != 1:
            k = den.const_value()
            num = num * Poly.const(1 / k)
            den = Poly.const(1)
        self.num = num
        self.den = den

    def is_polynomial(self) -> bool:
        return self.den.is_const()

    def __add__(self, other: RationalFn) -> RationalFn:
        if self.den == other.den:
            return RationalFn(self.num + other.num, self.den)
        return RationalFn(self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self) -> RationalFn:
        return RationalFn(-self.num, self.den)

    def __sub__(self, other: RationalFn) -> RationalFn:
        return self + (-other)

    def __mul__(self, other: RationalFn) -> RationalFn:
        return RationalFn(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: RationalFn) -> RationalFn:
        if other.num.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        return RationalFn(self.num * other.den, self.den * other.num)

    def __pow__(self, n: int) -> RationalFn:
        if n < 0:
            return RationalFn(Poly.const(1)) / (self ** (-n))
        return RationalFn(self.num**n, self.den**n)

    def evaluate(self, point: Mapping[int, Fraction]) -> Fraction:
        """Raises ZeroDivisionError when the denominator vanishes at ``point``."""
        den = self.den.evaluate(point)
        if den == 0:
            raise ZeroDivisionError("denominator vanishes")
        return self.num.evaluate(point) / den

    def substitute(self, images: Mapping[int, RationalFn]) -> RationalFn:
        return self.num.substitute(images) / self.den.substitute(images)

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalFn) and self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def __str__(self) -> str:
        if self.is_polynomial():
            return str(self.num)
        return f"({self.num}) / ({self.den})"

    def __repr__(self) -> str:
        return f"RationalFn({self})"


class ExprError(ValueError):
    pass


_EXPR_TOKEN = re.compile(
    r"\s*(?:(?P<var>x(?:\[\s*(?P<bracket>[-+]?\d+)\s*\]|(?P<plain>\d+)))"
    r"|(?P<num>\d+(?:\.\d*)?(?:[eE][-+]?\d+)?|\.\d+)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _EXPR_TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExprError(f"unexpected character {text[pos:].strip()[:1]!r} in expression {text!r}")
        if m.group("var"):
            idx = m.group("bracket") if m.group("bracket") is not None else m.group("plain")
            tokens.append(("var", int(idx)))
        elif m.group("num"):
            tokens.append(("num", parse_rational(m.group("num"))))
        else:
            tokens.append(("op", m.group("op")))
        pos = m.end()
    return tokens


def parse_expr(text: str) -> RationalFn:
    """Parse a rational expression over ``x<i>`` / ``x[<i>]`` variables.

    Grammar: sums of products of powers; ``^`` takes an integer exponent.
    ``p/q`` between two literals is ordinary division, hence exact.
    """
    tokens = _tokenize(text)
    if not tokens:
        raise ExprError("empty expression")
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def take():
        nonlocal pos
        tok = peek()
        if tok is None:
            raise ExprError(f"unexpected end of expression {text!r}")
        pos += 1
        return tok

    def expr() -> RationalFn:
        value = term()
        while peek() in (("op", "+"), ("op", "-")):
            op = take()[1]
            rhs = term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term() -> RationalFn:
        value = unary()
        while peek() in (("op", "*"), ("op", "/")):
            op = take()[1]
            rhs = unary()
            if op == "*":
                value = value * rhs
            else:
                try:
                    value = value / rhs
                except ZeroDivisionError:
                    raise ExprError(f"division by literal zero in {text!r}") from None
        return value

    def unary() -> RationalFn:
        if peek() == ("op", "-"):
            take()
            return -unary()
        if peek() == ("op", "+"):
            take()
            return unary()
        return power()

    def power() -> RationalFn:
        base = atom()
        if peek() == ("op", "^"):
            take()
            sign = 1
            if peek() == ("op", "-"):
                take()
                sign = -1
            tok = take()
            if tok[0] != "num" or tok[1].denominator != 1:
                raise ExprError(f"exponent must be an integer literal in {text!r}")
            try:
                return base ** (sign * int(tok[1]))
            except ZeroDivisionError:
                raise ExprError(f"zero raised to a negative power in {text!r}") from None
        return base

    def atom() -> RationalFn:
        tok = take()
        if tok[0] == "var":
            return RationalFn(Poly.var(tok[1]))
        if tok[0] == "num":
            return RationalFn(Poly.const(tok[1]))
        if tok == ("op", "("):
            value = expr()
            if take() != ("op", ")"):
                raise ExprError(f"expected ')' in {text!r}")
            return value
        raise ExprError(f"unexpected {tok[1]!r} in {text!r}")

    result = expr()
    if pos != len(tokens):
        raise ExprError(f"trailing tokens in {text!r}")
    return result
