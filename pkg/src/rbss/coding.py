"""Codes of sparse real vectors as hereditarily finite sets.

Two codes live here. ``encode_seq`` is the flat one: the set of tagged
entries ``{{i}, {{x_i}}}`` over the support. ``encode`` is the tree code:
with support spanning ``i0..i0+k`` it takes the ``zigzag(i0)``-th tree with
``k+1`` leaves, labels its leaves (depth-first, in canonical child order)
with the entries for ``i0, ..., i0+k`` and reads every internal node as the
set of its children. Zeros strictly inside the window are kept as entries.

Indices are atoms, so both codes are plain HF values over the rationals.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

from .hf import EMPTY, Atom, HFSet, HSet, single
from .machine import embed_input
from .rinf import RInfinity
from .trees import Tree, tree_unrank, zigzag

__all__ = [
    "entry",
    "read_entry",
    "encode",
    "decode",
    "encode_seq",
    "decode_seq",
    "code_tuple",
    "decode_tuple",
]


def entry(index: int, value) -> HSet:
    """The position-tagged pair ``{{index}, {{value}}}``."""
    return HSet((single(Atom(index)), single(single(Atom(value)))))


def read_entry(s: HFSet) -> Optional[tuple[int, Fraction]]:
    """Inverse of :func:`entry`; None when ``s`` is not an entry."""
    if s.is_atom or len(s) != 2:
        return None
    tag = val = None
    for e in s:
        if e.is_atom or len(e) != 1:
            return None
        (inner,) = e.elements
        if inner.is_atom:
            tag = inner.value
        elif len(inner) == 1 and inner.elements[0].is_atom:
            val = inner.elements[0].value
        else:
            return None
    if tag is None or val is None or tag.denominator != 1:
        return None
    return int(tag), val


def encode_seq(v: RInfinity) -> HSet:
    return HSet(entry(i, x) for i, x in v.items())


def decode_seq(s: HFSet) -> Optional[RInfinity]:
    if s.is_atom:
        return None
    values = {}
    for e in s:
        pair = read_entry(e)
        if pair is None or pair[0] in values or pair[1] == 0:
            return None
        values[pair[0]] = pair[1]
    return RInfinity(values)


def _interpret(tree: Tree, labels: list) -> HFSet:
    # post-order walk; leaves consume labels left to right
    it = iter(labels)
    results: list[HFSet] = []
    stack = [(tree, False)]
    while stack:
        node, expanded = stack.pop()
        if not node.children:
            results.append(next(it))
        elif expanded:
            k = len(node.children)
            kids = results[-k:]
            del results[-k:]
            results.append(HSet(kids))
        else:
            stack.append((node, True))
            for child in reversed(node.children):
                stack.append((child, False))
    return results[0]


def encode(v: RInfinity) -> HFSet:
    """Tree code of ``v``; the empty vector goes to the empty set.

    Isomorphic siblings get distinct labels, hence distinct interpretations,
    so nothing collapses and the code is injective.
    """
    support = v.support()
    if not support:
        return EMPTY
    i0, top = support[0], support[-1]
    tree = tree_unrank(top - i0 + 1, zigzag(i0))
    return _interpret(tree, [entry(i, v[i]) for i in range(i0, top + 1)])


def _collect_entries(s: HFSet) -> Optional[list[tuple[int, Fraction]]]:
    out = []
    stack = [s]
    while stack:
        node = stack.pop()
        if node.is_atom:
            return None
        pair = read_entry(node)
        if pair is not None:
            out.append(pair)
            continue
        if not len(node):
            return None
        stack.extend(node.elements)
    return out


def decode(s: HFSet) -> Optional[RInfinity]:
    """Partial inverse of :func:`encode`.

    Leaves are recognised structurally (an entry holds a singleton of an
    atom, an internal node never does); the candidate vector is then
    re-encoded, which settles tree shape and leaf order at once.
    """
    if s == EMPTY:
        return RInfinity()
    pairs = _collect_entries(s)
    if not pairs:
        return None
    indices = sorted(i for i, _ in pairs)
    if indices != list(range(indices[0], indices[0] + len(indices))):
        return None
    v = RInfinity(dict(pairs))
    if v[indices[0]] == 0 or v[indices[-1]] == 0:
        return None
    return v if encode(v) == s else None


def code_tuple(values: Sequence) -> HSet:
    """Flat code of a finite tuple in machine input layout (length at 0)."""
    return encode_seq(embed_input([Fraction(x) for x in values]))


def decode_tuple(s: HFSet) -> Optional[tuple[Fraction, ...]]:
    v = decode_seq(s)
    if v is None:
        return None
    n = v[0]
    if n.denominator != 1 or n < 0 or (n == 0 and len(v)):
        return None
    n = int(n)
    if any(i < 0 or i > n for i in v.support()):
        return None
    return tuple(v[i] for i in range(1, n + 1))
