"""Bounded symbolic execution of BSS machines.

Each complete path from the input node to an output node is returned with
the branch conditions and output functions composed symbolically in terms of
the input variables ``x1..xn``. Feasibility is not decided, except that
conditions which reduce to constants are resolved on the spot.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Optional, Sequence

from .machine import BranchNode, ComputeNode, InputNode, Machine, OutputNode, ShiftNode
from .poly import Poly, RationalFn
from .scalar import format_pq

__all__ = ["Condition", "PathSpec", "enumerate_paths", "eval_path", "path_to_json"]

_ZERO = RationalFn(Poly())


@dataclass(frozen=True)
class Condition:
    """Sign condition on ``num/den``: ``ge0`` and ``lt0`` are read as
    ``num*den >= 0`` / ``< 0`` together with ``den != 0``; ``ne0`` asks
    ``num != 0`` (a denominator met at a computation node)."""

    num: Poly
    den: Poly
    kind: Literal["ge0", "lt0", "ne0"]
    node: str

    def holds(self, point) -> bool:
        q = self.den.evaluate(point)
        if q == 0:
            return False
        p = self.num.evaluate(point)
        if self.kind == "ne0":
            return p != 0
        if self.kind == "ge0":
            return p * q >= 0
        return p * q < 0


@dataclass(frozen=True)
class PathSpec:
    node_sequence: tuple[str, ...]
    conditions: tuple[Condition, ...]
    outputs: tuple[RationalFn, ...]
    arity: int


def _decided(cond: Condition) -> Optional[bool]:
    if cond.num.is_const() and cond.den.is_const():
        return cond.holds({})
    return None


def enumerate_paths(m: Machine, arity: int, depth: int, parallel: bool = False) -> list[PathSpec]:
    """All paths of at most ``depth`` nodes ending at an output node.

    ``depth`` counts configurations, so it matches the ``fuel`` of
    :func:`rbss.machine.run`.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if arity != m.arity:
        raise ValueError(f"machine {m.name!r} has arity {m.arity}, not {arity}")
    start = (m.input_node, {k + 1: RationalFn(Poly.var(k + 1)) for k in range(arity)}, (), ())
    if not parallel:
        out: list[PathSpec] = []
        _explore(m, arity, depth, [start], out)
        return out
    # split at the first frontier wider than one state, then explore subtrees independently
    frontier = [start]
    done: list[PathSpec] = []
    while len(frontier) == 1:
        nxt = _expand(m, arity, depth, frontier[0], done)
        if not nxt:
            return done
        frontier = nxt
    with ThreadPoolExecutor() as pool:
        parts = list(pool.map(lambda s: _collect(m, arity, depth, s), frontier))
    return done + [p for part in parts for p in part]


def _collect(m, arity, depth, state) -> list[PathSpec]:
    out: list[PathSpec] = []
    _explore(m, arity, depth, [state], out)
    return out


def _explore(m, arity, depth, stack, out) -> None:
    # depth-first with an explicit stack; children pushed in reverse keep edge-1 first
    while stack:
        children = _expand(m, arity, depth, stack.pop(), out)
        stack.extend(reversed(children))


def _images(state: dict, variables) -> dict:
    return {v: state.get(v, _ZERO) for v in variables}


def _expand(m: Machine, arity: int, depth: int, item, out: list) -> list:
    node_id, state, seq, conds = item
    node = m.nodes[node_id]
    seq = seq + (node_id,)
    if isinstance(node, OutputNode):
        outputs = tuple(state.get(i, _ZERO) for i in node.coords)
        out.append(PathSpec(seq, conds, outputs, arity))
        return []
    if len(seq) >= depth:
        return []
    if isinstance(node, InputNode):
        embedded = {0: RationalFn(Poly.const(arity))} if arity else {}
        embedded.update(state)
        return [(node.next, embedded, seq, conds)]
    if isinstance(node, ComputeNode):
        new_state = dict(state)
        extra = []
        for index, fn in node.assignments:
            images = _images(state, fn.num.variables() | fn.den.variables())
            if not fn.den.is_const():
                den_value = fn.den.substitute(images)
                cond = Condition(den_value.num, den_value.den, "ne0", node_id)
                verdict = _decided(cond)
                if verdict is False:
                    return []
                if verdict is None:
                    extra.append(cond)
            try:
                value = fn.substitute(images)
            except ZeroDivisionError:
                return []
            if value.num.is_zero():
                new_state.pop(index, None)
            else:
                new_state[index] = value
        return [(node.next, new_state, seq, conds + tuple(extra))]
    if isinstance(node, BranchNode):
        value = node.test.substitute(_images(state, node.test.variables()))
        children = []
        for kind, target in (("ge0", node.on_nonneg), ("lt0", node.on_neg)):
            cond = Condition(value.num, value.den, kind, node_id)
            verdict = _decided(cond)
            if verdict is False:
                continue
            children.append((target, state, seq, conds if verdict else conds + (cond,)))
        return children
    if isinstance(node, ShiftNode):
        offset = -1 if node.direction == "left" else 1
        return [(node.next, {i + offset: v for i, v in state.items()}, seq, conds)]
    raise TypeError(f"unknown node {node!r}")


def eval_path(p: PathSpec, values: Sequence) -> Optional[tuple[Fraction, ...]]:
    """Output of the path at ``values`` if every condition holds there, else None."""
    values = tuple(Fraction(v) for v in values)
    if len(values) != p.arity:
        raise ValueError(f"path expects {p.arity} inputs, got {len(values)}")
    point = {k + 1: v for k, v in enumerate(values)}
    if not all(c.holds(point) for c in p.conditions):
        return None
    return tuple(fn.evaluate(point) for fn in p.outputs)


def _poly_json(poly: Poly) -> list:
    return [
        {"coef": format_pq(c), "powers": [[v, e] for v, e in mono]}
        for mono, c in sorted(poly.terms.items(), key=lambda kv: kv[0])
    ]


def path_to_json(p: PathSpec) -> dict:
    return {
        "nodes": list(p.node_sequence),
        "conditions": [
            {"node": c.node, "sign": c.kind, "num": _poly_json(c.num), "den": _poly_json(c.den), "text": f"({c.num}) / ({c.den})"}
            for c in p.conditions
        ],
        "outputs": [{"num": _poly_json(f.num), "den": _poly_json(f.den), "text": str(f)} for f in p.outputs],
    }
