"""Exact scalars.

The VM computes over :class:`fractions.Fraction` only; this module holds the
parsing and printing conventions shared by every text format.
"""

from __future__ import annotations

import re
from fractions import Fraction

__all__ = ["parse_rational", "format_rational", "format_pq", "format_decimal", "parse_rational_list"]

_RATIONAL = re.compile(r"^[-+]?(\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?(/[-+]?\d+)?$")


def parse_rational(text: str) -> Fraction:
    """Read ``p/q``, an integer or a finite decimal, exactly."""
    text = text.strip()
    if not _RATIONAL.match(text):
        raise ValueError(f"not a rational literal: {text!r}")
    if "/" in text:
        num, den = text.split("/")
        if "." in num or "e" in num.lower():
            raise ValueError(f"not a rational literal: {text!r}")
        if int(den) == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return Fraction(int(num), int(den))
    return Fraction(text)


def parse_rational_list(text: str) -> list[Fraction]:
    text = text.strip()
    if not text:
        return []
    return [parse_rational(part) for part in text.split(",")]


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def format_pq(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def format_decimal(q: Fraction, digits: int) -> str:
    """Truncate toward zero to ``digits`` fractional digits."""
    q = Fraction(q)
    sign = "-" if q < 0 else ""
    scaled = abs(q.numerator) * 10**digits // q.denominator
    whole, frac = divmod(scaled, 10**digits)
    if digits == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{digits}d}"
