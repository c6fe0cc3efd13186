"""Hereditarily finite sets over rational atoms.

Values are kept in canonical extensional form: every set stores its
elements sorted under a fixed total order with duplicates removed, so
structural equality and extensional equality coincide.
"""

from __future__ import annotations

import re
from operator import attrgetter
from fractions import Fraction
from typing import Iterable, Iterator, Union

from .scalar import format_rational, parse_rational

__all__ = [
    "HFSet",
    "Atom",
    "HSet",
    "EMPTY",
    "atom",
    "hset",
    "single",
    "canonicalize",
    "hf_equal",
    "hf_member",
    "hf_rank",
    "format_hf",
    "parse_hf",
    "HFParseError",
]


class HFSet:
    """Base class of HF values. Use :class:`Atom` and :class:`HSet`."""

    __slots__ = ("_key", "_hash")

    is_atom = False

    def sort_key(self):
        return self._key

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, HFSet):
            return NotImplemented
        return self._hash == other._hash and self._key == other._key

    def __lt__(self, other: HFSet) -> bool:
        return self._key < other._key

    def __repr__(self) -> str:
        return f"hf({format_hf(self)})"


_sort_key = attrgetter("_key")


class Atom(HFSet):
    __slots__ = ("value",)

    is_atom = True

    def __init__(self, value) -> None:
        self.value = Fraction(value)
        self._key = (0, self.value)
        self._hash = hash(self._key)


class HSet(HFSet):
    """A finite set. Construct through :func:`hset` unless the elements are
    already sorted and distinct."""

    __slots__ = ("elements", "_members")

    def __init__(self, elements: tuple = (), _trusted: bool = False) -> None:
        if not _trusted:
            elements = tuple(sorted(set(elements), key=_sort_key))
        self.elements = elements
        self._members = None
        self._key = (1, len(elements), tuple(e._key for e in elements))
        # built from child hashes so deep nesting stays linear
        self._hash = hash((1, tuple(e._hash for e in elements)))

    def __contains__(self, item: HFSet) -> bool:
        if self._members is None:
            self._members = frozenset(self.elements)
        return item in self._members

    def __iter__(self) -> Iterator[HFSet]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)


EMPTY = HSet((), _trusted=True)


def atom(value) -> Atom:
    return Atom(value)


def hset(*elements: HFSet) -> HSet:
    return HSet(elements)


def single(x: HFSet) -> HSet:
    return HSet((x,), _trusted=True)


Raw = Union[HFSet, int, Fraction, str, Iterable]


def canonicalize(raw: Raw) -> HFSet:
    """Build a canonical HF value from a nested description.

    Numbers (and numeric strings) become atoms; any other iterable becomes
    a set of its canonicalized members. Already-built values pass through.
    """
    if isinstance(raw, HFSet):
        return raw
    if isinstance(raw, (int, Fraction)) and not isinstance(raw, bool):
        return Atom(raw)
    if isinstance(raw, str):
        return Atom(parse_rational(raw))
    return HSet(canonicalize(x) for x in raw)


def hf_equal(a: HFSet, b: HFSet) -> bool:
    return a == b


def hf_member(a: HFSet, b: HFSet) -> bool:
    if b.is_atom:
        raise TypeError("atoms have no members")
    return a in b


def hf_rank(x: HFSet) -> int:
    """0 for atoms, 1 + max member rank for sets (the empty set has rank 1)."""
    if x.is_atom:
        return 0
    return 1 + max((hf_rank(e) for e in x.elements), default=0)


def format_hf(x: HFSet) -> str:
    if x.is_atom:
        return f"atom({format_rational(x.value)})"
    return "{" + ", ".join(format_hf(e) for e in x.elements) + "}"


class HFParseError(ValueError):
    pass


_TOKEN = re.compile(r"\s*(atom\(\s*([^)\s]+)\s*\)|[{},]|[-+]?[0-9][0-9./]*)")


def parse_hf(text: str) -> HFSet:
    """Parse ``atom(p/q)`` / ``{ e1, e2 }``. Bare rationals are read as atoms."""
    pos = 0
    tokens = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise HFParseError(f"unexpected input at offset {pos}: {text[pos:pos + 10]!r}")
        tokens.append(m.group(2) if m.group(2) is not None else m.group(1))
        if m.group(2) is not None:
            tokens[-1] = ("atom", m.group(2))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    value, i = _parse_tokens(tokens, 0)
    if i != len(tokens):
        raise HFParseError("trailing input after HF value")
    return value


def _parse_tokens(tokens: list, i: int):
    if i >= len(tokens):
        raise HFParseError("unexpected end of input")
    tok = tokens[i]
    if isinstance(tok, tuple):
        return Atom(_rational(tok[1])), i + 1
    if tok == "{":
        items = []
        i += 1
        if i < len(tokens) and tokens[i] == "}":
            return EMPTY, i + 1
        while True:
            item, i = _parse_tokens(tokens, i)
            items.append(item)
            if i >= len(tokens):
                raise HFParseError("unterminated set")
            if tokens[i] == "}":
                return HSet(items), i + 1
            if tokens[i] != ",":
                raise HFParseError(f"expected ',' or '}}', got {tokens[i]!r}")
            i += 1
    if tok in ("}", ","):
        raise HFParseError(f"unexpected {tok!r}")
    return Atom(_rational(tok)), i + 1


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise HFParseError(str(exc)) from None
