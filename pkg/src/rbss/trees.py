"""Repetition-free enumeration of rooted unordered trees by leaf count.

For a fixed leaf count ``k`` the enumeration lists trees by node count and,
within a node count, by a canonical order defined through the children
multiset: first by its profile (how many children of each (nodes, leaves)
class, profiles compared as sorted tuples), then by the ranks of the chosen
children inside each class (multisets ranked in colex order, classes as
mixed-radix digits). Ranks are computed by counting, never by listing.

Trees with one leaf are chains, so their node count can reach the rank
itself; everything here avoids recursion on tree height.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb
from typing import Iterable

__all__ = [
    "Tree",
    "LEAF",
    "zigzag",
    "unzigzag",
    "tree_count",
    "tree_rank",
    "tree_unrank",
    "tree_from_nested",
    "tree_to_nested",
    "leaves_in_order",
]


def zigzag(i: int) -> int:
    """Bijection Z -> N: 2i for i >= 0, -2i-1 for i < 0."""
    return 2 * i if i >= 0 else -2 * i - 1


def unzigzag(n: int) -> int:
    if n < 0:
        raise ValueError("zigzag codes are natural numbers")
    return n // 2 if n % 2 == 0 else -(n + 1) // 2


class Tree:
    """Canonical rooted unordered tree.

    ``rank`` is the position among trees with the same node and leaf
    counts, so ``key`` identifies the tree up to isomorphism.
    """

    __slots__ = ("children", "nodes", "leaves", "rank", "key", "_hash")

    def __init__(self, children: Iterable[Tree] = ()) -> None:
        kids = tuple(sorted(children, key=lambda c: c.key))
        self.children = kids
        self.nodes = 1 + sum(c.nodes for c in kids)
        self.leaves = sum(c.leaves for c in kids) if kids else 1
        self.rank = _rank_of_children(kids, self.nodes, self.leaves)
        self.key = (self.nodes, self.leaves, self.rank)
        self._hash = hash(self.key)

    def __eq__(self, other) -> bool:
        return isinstance(other, Tree) and self.key == other.key

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Tree(nodes={self.nodes}, leaves={self.leaves}, rank={self.rank})"


def _chain_count(nodes: int) -> int:
    return 1 if nodes >= 1 else 0


@lru_cache(maxsize=None)
def tree_count(nodes: int, leaves: int) -> int:
    """Number of rooted unordered trees with the given node and leaf counts."""
    if nodes < 1 or leaves < 1 or leaves > nodes:
        return 0
    if leaves == 1:
        return _chain_count(nodes)
    if nodes == 1:
        return 0
    return sum(count for _, count in _profiles(nodes - 1, leaves))


@lru_cache(maxsize=None)
def _profiles(nodes: int, leaves: int) -> tuple:
    """Children profiles summing to (nodes, leaves), in canonical order.

    A profile is a tuple of ``((n, k), multiplicity)`` with classes ascending,
    paired with the number of child multisets realizing it.
    """
    if leaves == 1:
        return (((((nodes, 1), 1),), 1),) if nodes >= 1 else ()
    # leaf children are implied by the rest: only pick classes that contain
    # internal nodes, within the internal-node budget
    budget = nodes - leaves
    if budget < 0:
        return ()
    classes = [
        (k + d, k)
        for d in range(1, budget + 1)
        for k in range(1, leaves + 1)
        if k + d <= nodes and tree_count(k + d, k)
    ]
    classes.sort()
    found = []

    def walk(start: int, n_left: int, k_left: int, acc: list) -> None:
        spare = n_left - k_left
        if spare == 0:
            if k_left:
                found.append(tuple(sorted(acc + [((1, 1), k_left)])))
            elif acc:
                found.append(tuple(sorted(acc)))
        for j in range(start, len(classes)):
            n, k = classes[j]
            if n - k > spare or k > k_left:
                continue
            mult = 1
            while mult * (n - k) <= spare and mult * k <= k_left:
                walk(j + 1, n_left - mult * n, k_left - mult * k, acc + [((n, k), mult)])
                mult += 1

    walk(0, nodes, leaves, [])
    found.sort()
    return tuple((p, _profile_size(p)) for p in found)


def _profile_size(profile: tuple) -> int:
    total = 1
    for (n, k), m in profile:
        total *= comb(tree_count(n, k) + m - 1, m)
    return total


def _multiset_rank(items: list[int]) -> int:
    # non-decreasing a_1..a_m  <->  strictly increasing a_i + i, ranked in colex
    return sum(comb(a + i, i + 1) for i, a in enumerate(sorted(items)))


def _multiset_unrank(rank: int, size: int, types: int) -> list[int]:
    out = []
    top = types + size - 1
    for i in range(size, 0, -1):
        c = top - 1
        while comb(c, i) > rank:
            c -= 1
        rank -= comb(c, i)
        out.append(c - (i - 1))
        top = c
    return out[::-1]


def _rank_of_children(kids: tuple, nodes: int, leaves: int) -> int:
    if not kids or leaves == 1:
        return 0
    groups: dict = {}
    for child in kids:
        groups.setdefault((child.nodes, child.leaves), []).append(child.rank)
    profile = tuple(sorted((cls, len(ranks)) for cls, ranks in groups.items()))
    offset = 0
    for p, count in _profiles(nodes - 1, leaves):
        if p == profile:
            break
        offset += count
    else:  # pragma: no cover - profiles are exhaustive
        raise AssertionError("profile not enumerated")
    digit = 0
    for cls, m in profile:
        digit = digit * comb(tree_count(*cls) + m - 1, m) + _multiset_rank(groups[cls])
    return offset + digit


LEAF = Tree()


_CHAINS = [LEAF]


def _chain(nodes: int) -> Tree:
    # chains share structure, so keep every one built so far
    while len(_CHAINS) < nodes:
        _CHAINS.append(Tree((_CHAINS[-1],)))
    return _CHAINS[nodes - 1]


@lru_cache(maxsize=4096)
def _local_unrank(nodes: int, leaves: int, rank: int) -> Tree:
    if leaves == 1:
        return _chain(nodes)
    for profile, count in _profiles(nodes - 1, leaves):
        if rank < count:
            break
        rank -= count
    else:
        raise IndexError("rank out of range")
    radices = [comb(tree_count(*cls) + m - 1, m) for cls, m in profile]
    digits = []
    for radix in reversed(radices):
        rank, d = divmod(rank, radix)
        digits.append(d)
    digits.reverse()
    children = []
    for (cls, m), d in zip(profile, digits):
        for r in _multiset_unrank(d, m, tree_count(*cls)):
            children.append(_local_unrank(cls[0], cls[1], r))
    return Tree(children)


def tree_unrank(leaves: int, n: int) -> Tree:
    """The ``n``-th canonical tree with exactly ``leaves`` leaves."""
    if leaves < 1:
        raise ValueError("trees have at least one leaf")
    if n < 0:
        raise ValueError("ranks are natural numbers")
    if leaves == 1:
        return _chain(n + 1)
    nodes = 1
    while True:
        count = tree_count(nodes, leaves)
        if n < count:
            return _local_unrank(nodes, leaves, n)
        n -= count
        nodes += 1


def tree_rank(leaves: int, t) -> int:
    if not isinstance(t, Tree):
        t = tree_from_nested(t)
    if t.leaves != leaves:
        raise ValueError(f"tree has {t.leaves} leaves, expected {leaves}")
    if leaves == 1:
        return t.nodes - 1
    return sum(tree_count(n, leaves) for n in range(1, t.nodes)) + t.rank


def tree_from_nested(raw) -> Tree:
    """Build from nested sequences of children (``()`` is a single node)."""
    # iterative post-order so chains of any length are fine
    stack = [(raw, False)]
    built: list[Tree] = []
    while stack:
        node, expanded = stack.pop()
        if expanded:
            k = len(node)
            kids = built[len(built) - k:] if k else []
            del built[len(built) - k:]
            built.append(Tree(kids))
        else:
            stack.append((node, True))
            for child in reversed(list(node)):
                stack.append((child, False))
    return built[0]


def tree_to_nested(t: Tree) -> tuple:
    """Canonical nested-tuple form."""
    stack = [(t, False)]
    built: list[tuple] = []
    while stack:
        node, expanded = stack.pop()
        if expanded:
            k = len(node.children)
            kids = tuple(built[len(built) - k:]) if k else ()
            del built[len(built) - k:]
            built.append(kids)
        else:
            stack.append((node, True))
            for child in reversed(node.children):
                stack.append((child, False))
    return built[0]


def leaves_in_order(t: Tree) -> list[Tree]:
    """Leaf nodes in depth-first, left-to-right (lexicographic) order, as the
    list of paths from the root; each path is a tuple of child positions."""
    out = []
    stack = [(t, ())]
    while stack:
        node, path = stack.pop()
        if not node.children:
            out.append(path)
            continue
        for pos in range(len(node.children) - 1, -1, -1):
            stack.append((node.children[pos], path + (pos,)))
    return out
