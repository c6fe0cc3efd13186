"""Δ₀ building blocks over coded tuples, states and records.

Codes handled here:

* an *entry* ``{{i}, {{v}}}`` with atoms ``i`` and ``v``;
* a *slot* ``{{k}, {{X}}}``, the same shape with any payload ``X``;
* a *state* or *tuple code*: a set of entries, zero coordinates omitted.

Entry destructuring binds the index and the value as atom variables. The
``forall`` variants range over every way an element can be read, so a
malformed witness cannot pick a convenient reading.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Sequence, Union

from .formula import (
    FALSE,
    TRUE,
    And,
    Base,
    BoundedExists,
    BoundedForall,
    Equal,
    Formula,
    Lit,
    Member,
    Not,
    Or,
    Single,
    Term,
    Var,
)
from .coding import entry
from .hf import EMPTY, Atom, HFSet, HSet, single

__all__ = [
    "Names",
    "entry_elem_exists",
    "entry_elem_forall",
    "V",
    "atom_lit",
    "sv",
    "sq",
    "conj",
    "disj",
    "slot",
    "entry_exists",
    "entry_forall",
    "field_exists",
    "field_forall",
    "read_coord",
    "tuple_is",
    "Coord",
    "AtomVar",
    "Const",
]


class Names:
    """Fresh variable names with a readable stem."""

    def __init__(self, prefix: str = "") -> None:
        self.prefix = prefix
        self._count = itertools.count()

    def __call__(self, stem: str) -> str:
        return f"{self.prefix}{stem}{next(self._count)}"


def V(name: str) -> Var:
    return Var(name)


def atom_lit(q) -> Lit:
    return Lit(Atom(Fraction(q)))


def sv(name: str) -> Single:
    """``{name}``, the lifted form of an atom variable."""
    return Single(Var(name))


def sq(q) -> Single:
    return Single(atom_lit(q))


def conj(*parts: Formula) -> Formula:
    flat = []
    for p in parts:
        if isinstance(p, And):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*parts: Formula) -> Formula:
    flat = []
    for p in parts:
        if isinstance(p, Or):
            flat.extend(p.parts)
        else:
            flat.append(p)
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def slot(k: int, payload: HFSet) -> HSet:
    return HSet((single(Atom(k)), single(single(payload))))


def _as_term(t: Union[str, Term]) -> Term:
    return Var(t) if isinstance(t, str) else t


def _destructure(p: str, i: str, v: str, names: Names):
    a, b, w = names("a"), names("b"), names("w")
    guard = [Equal(Var(a), sv(i)), Not(Equal(Var(a), Var(b))), Equal(Var(b), sv(w)), Equal(Var(w), sv(v))]
    return a, b, w, guard


def entry_exists(container, i: str, v: str, body: Formula, names: Names) -> Formula:
    """Some element of ``container`` reads as entry ``(i, v)`` with ``body``."""
    p = names("p")
    return BoundedExists(p, _as_term(container), entry_elem_exists(p, i, v, body, names))


def entry_elem_exists(p: str, i: str, v: str, body: Formula, names: Names) -> Formula:
    a, b, w, guard = _destructure(p, i, v, names)
    return BoundedExists(
        a, Var(p),
        BoundedExists(
            i, Var(a),
            And((guard[0], BoundedExists(
                b, Var(p),
                And((guard[1], BoundedExists(
                    w, Var(b),
                    And((guard[2], BoundedExists(v, Var(w), conj(guard[3], body)))),
                ))),
            ))),
        ),
    )


def entry_elem_forall(p: str, i: str, v: str, body: Formula, names: Names) -> Formula:
    a, b, w, guard = _destructure(p, i, v, names)
    return BoundedForall(
        a, Var(p),
        BoundedForall(
            i, Var(a),
            BoundedForall(
                b, Var(p),
                BoundedForall(
                    w, Var(b),
                    BoundedForall(v, Var(w), disj(Not(conj(*guard)), body)),
                ),
            ),
        ),
    )


def entry_forall(container, i: str, v: str, body: Formula, names: Names, strict: bool = True) -> Formula:
    """Every element of ``container`` is an entry and every reading satisfies
    ``body``; with ``strict=False`` non-entries are simply skipped."""
    p = names("p")
    every = entry_elem_forall(p, i, v, body, names)
    if strict:
        every = conj(entry_elem_exists(p, names("i"), names("v"), TRUE, names), every)
    return BoundedForall(p, _as_term(container), every)


def field_exists(record: str, k: int, x: str, body: Formula, names: Names) -> Formula:
    p, a, b, w = names("p"), names("a"), names("b"), names("w")
    return BoundedExists(
        p, Var(record),
        BoundedExists(
            a, Var(p),
            And((Equal(Var(a), sq(k)), BoundedExists(
                b, Var(p),
                And((Not(Equal(Var(a), Var(b))), BoundedExists(
                    w, Var(b),
                    And((Equal(Var(b), Single(Var(w))), BoundedExists(x, Var(w), body))),
                ))),
            ))),
        ),
    )


def field_forall(record: str, k: int, x: str, body: Formula, names: Names) -> Formula:
    p, a, b, w = names("p"), names("a"), names("b"), names("w")
    guard = conj(Equal(Var(a), sq(k)), Not(Equal(Var(a), Var(b))), Equal(Var(b), Single(Var(w))))
    return BoundedForall(
        p, Var(record),
        BoundedForall(
            a, Var(p),
            BoundedForall(b, Var(p), BoundedForall(w, Var(b), BoundedForall(x, Var(w), disj(Not(guard), body)))),
        ),
    )


def read_coord(state, index: int, t: str, names: Names) -> Formula:
    """Coordinate ``index`` of the coded state equals the atom ``t`` (zero if absent)."""
    i, v = names("i"), names("v")
    present = entry_exists(state, i, v, conj(Equal(Var(i), atom_lit(index)), Equal(Var(v), Var(t))), names)
    i2, v2 = names("i"), names("v")
    absent = Not(entry_exists(state, i2, v2, Equal(Var(i2), atom_lit(index)), names))
    return disj(present, conj(Base("iszero", (sv(t),)), absent))


class Coord:
    """Source: coordinate ``index`` of a coded tuple/state term."""

    def __init__(self, code, index: int) -> None:
        self.code = code
        self.index = index


class AtomVar:
    def __init__(self, name: str) -> None:
        self.name = name


class Const:
    def __init__(self, value) -> None:
        self.value = Fraction(value)


Source = Union[Coord, AtomVar, Const]


def _source_has(src: Source, v: str, names: Names) -> Formula:
    """The nonzero atom ``v`` is the value of ``src``."""
    if isinstance(src, AtomVar):
        return Equal(Var(v), Var(src.name))
    if isinstance(src, Const):
        return Equal(Var(v), atom_lit(src.value)) if src.value else FALSE
    i, u = names("i"), names("u")
    return entry_exists(src.code, i, u, conj(Equal(Var(i), atom_lit(src.index)), Equal(Var(u), Var(v))), names)


def tuple_is(code, sources: Sequence[Source], names: Names) -> Formula:
    """``code`` is the tuple code of the listed values (length at index 0)."""
    n = len(sources)
    code = _as_term(code)
    if n == 0:
        return Equal(code, Lit(EMPTY))
    i, v = names("i"), names("v")
    allowed = [conj(Equal(Var(i), atom_lit(0)), Equal(Var(v), atom_lit(n)))]
    for j, src in enumerate(sources, start=1):
        allowed.append(conj(Equal(Var(i), atom_lit(j)), Not(Base("iszero", (sv(v),))), _source_has(src, v, names)))
    parts = [Member(Lit(entry(0, n)), code), entry_forall(code, i, v, disj(*allowed), names)]
    for j, src in enumerate(sources, start=1):
        parts.append(_source_in(code, j, src, names))
    return conj(*parts)


def _source_in(code: Term, j: int, src: Source, names: Names) -> Formula:
    """The value of ``src``, when nonzero, sits at index ``j`` of ``code``."""
    i, v = names("i"), names("v")
    if isinstance(src, Const):
        if not src.value:
            return TRUE
        return Member(Lit(entry(j, src.value)), code)
    if isinstance(src, AtomVar):
        there = entry_exists(code, i, v, conj(Equal(Var(i), atom_lit(j)), Equal(Var(v), Var(src.name))), names)
        return disj(Base("iszero", (sv(src.name),)), there)
    i2, u = names("i"), names("u")
    there = entry_exists(code, i, v, conj(Equal(Var(i), atom_lit(j)), Equal(Var(v), Var(u))), names)
    return entry_forall(src.code, i2, u, disj(Not(Equal(Var(i2), atom_lit(src.index))), there), names, strict=False)
