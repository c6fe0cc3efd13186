from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

__all__ = ["RInfinity"]


class RInfinity(Mapping[int, Fraction]):
    """Almost-everywhere-zero sequence indexed by the integers.

    Zero entries are never stored, so equal vectors have equal ``items()``.
    Missing indices read as zero.
    """

    __slots__ = ("_entries", "_hash")

    def __init__(self, entries: Mapping[int, Fraction] | Iterable = ()) -> None:
        items = entries.items() if isinstance(entries, Mapping) else entries
        self._entries = {int(i): Fraction(v) for i, v in items if v != 0}
        self._hash = None

    @classmethod
    def from_values(cls, values: Iterable, start: int = 0) -> RInfinity:
        return cls((start + k, v) for k, v in enumerate(values))

    def __getitem__(self, index: int) -> Fraction:
        return self._entries.get(index, Fraction(0))

    def __iter__(self):
        return iter(sorted(self._entries))

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, index) -> bool:
        return index in self._entries

    def support(self) -> list[int]:
        return sorted(self._entries)

    def __eq__(self, other) -> bool:
        if isinstance(other, RInfinity):
            return self._entries == other._entries
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._entries.items()))
        return self._hash

    def shifted(self, offset: int) -> RInfinity:
        """Entry at ``i`` moves to ``i + offset``."""
        return RInfinity({i + offset: v for i, v in self._entries.items()})

    def updated(self, changes: Mapping[int, Fraction]) -> RInfinity:
        merged = dict(self._entries)
        merged.update(changes)
        return RInfinity(merged)

    def __repr__(self) -> str:
        body = ", ".join(f"{i}: {v}" for i, v in sorted(self._entries.items()))
        return f"RInfinity({{{body}}})"
