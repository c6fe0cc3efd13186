"""BSS machines over the ordered field, with exact rational arithmetic.

A machine is a finite graph of input, computation, branch, shift and
output nodes acting on a state in R_infinity. Source text uses the
line-oriented DSL::

    machine square
    input 1 -> sq
    node sq compute x1 := x1*x1 goto out
    node out output [1]

The input node is always named ``input``. Its map is the standard
embedding: ``(a_1..a_n)`` goes to coordinates ``1..n`` with ``n`` stored
at coordinate 0.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Sequence, Union

from .poly import ExprError, Poly, RationalFn, parse_expr
from .rinf import RInfinity
from .scalar import format_pq

__all__ = [
    "InputNode",
    "ComputeNode",
    "BranchNode",
    "ShiftNode",
    "OutputNode",
    "Machine",
    "MachineError",
    "Configuration",
    "Output",
    "Undefined",
    "Diverged",
    "Trace",
    "parse_machine",
    "load_machine",
    "initial_configuration",
    "embed_input",
    "step",
    "run",
    "trace",
    "trace_to_json",
    "result_to_json",
]

INPUT_ID = "input"


@dataclass(frozen=True)
class InputNode:
    id: str
    arity: int
    next: str
    line: int = 0

    def successors(self) -> tuple[str, ...]:
        return (self.next,)


@dataclass(frozen=True)
class ComputeNode:
    """Simultaneous assignment on a finite window of coordinates."""

    id: str
    assignments: tuple[tuple[int, RationalFn], ...]
    next: str
    line: int = 0

    @property
    def window(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.assignments)

    def successors(self) -> tuple[str, ...]:
        return (self.next,)


@dataclass(frozen=True)
class BranchNode:
    """Takes ``on_nonneg`` (edge 1) iff ``test(x) >= 0``, else ``on_neg`` (edge 0)."""

    id: str
    test: Poly
    on_nonneg: str
    on_neg: str
    line: int = 0

    def successors(self) -> tuple[str, ...]:
        return (self.on_nonneg, self.on_neg)


@dataclass(frozen=True)
class ShiftNode:
    id: str
    direction: Literal["left", "right"]
    next: str
    line: int = 0

    def successors(self) -> tuple[str, ...]:
        return (self.next,)


@dataclass(frozen=True)
class OutputNode:
    id: str
    coords: tuple[int, ...]
    line: int = 0

    def successors(self) -> tuple[str, ...]:
        return ()


Node = Union[InputNode, ComputeNode, BranchNode, ShiftNode, OutputNode]


@dataclass(frozen=True, eq=False)
class Machine:
    name: str
    nodes: dict
    input_node: str = INPUT_ID
    total: bool = False

    @property
    def arity(self) -> int:
        return self.nodes[self.input_node].arity

    def node_index(self, node_id: str) -> int:
        """Position of a node in declaration order (the input node is 0)."""
        return list(self.nodes).index(node_id)

    def output_nodes(self) -> list[OutputNode]:
        return [n for n in self.nodes.values() if isinstance(n, OutputNode)]


class MachineError(ValueError):
    """Parse or validation failure; ``problems`` holds ``(line, message)`` pairs."""

    def __init__(self, problems: Sequence[tuple[int, str]]) -> None:
        self.problems = list(problems)
        super().__init__("\n".join(f"line {ln}: {msg}" if ln else msg for ln, msg in self.problems))


_IDENT = r"[A-Za-z_][A-Za-z0-9_.-]*"
_RE_MACHINE = re.compile(rf"^machine\s+({_IDENT})$")
_RE_INPUT = re.compile(r"^input\s+(\S+)\s*(?:->\s*(\S*))?$")
_RE_NODE = re.compile(r"^node\s+(\S+)\s+(\w+)\s*(.*)$")
_RE_GOTO = re.compile(r"^(.*?)\s*(?:\bgoto\b\s*(\S*))?$")
_RE_ASSIGN = re.compile(r"^x(?:\[\s*([-+]?\d+)\s*\]|(\d+))\s*:=\s*(.+)$")


def parse_machine(text: str) -> Machine:
    problems: list[tuple[int, str]] = []
    name = None
    nodes: dict[str, Node] = {}
    total = False

    def add(node: Node, lineno: int) -> None:
        if node.id in nodes:
            problems.append((lineno, f"duplicate node id {node.id!r}"))
        elif not re.fullmatch(_IDENT, node.id):
            problems.append((lineno, f"invalid node id {node.id!r}"))
        else:
            nodes[node.id] = node

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m := _RE_MACHINE.match(line):
            if name is not None:
                problems.append((lineno, "second 'machine' declaration"))
            name = m.group(1)
        elif line == "total":
            total = True
        elif m := _RE_INPUT.match(line):
            arity_text, target = m.group(1), m.group(2)
            if not arity_text.isdigit():
                problems.append((lineno, f"input arity must be a natural number, got {arity_text!r}"))
                continue
            if not target:
                problems.append((lineno, "out-degree violation: the input node needs exactly one outgoing edge"))
                continue
            add(InputNode(INPUT_ID, int(arity_text), target, lineno), lineno)
        elif m := _RE_NODE.match(line):
            node_id, kind, rest = m.groups()
            try:
                node = _parse_node(node_id, kind, rest, lineno)
            except (ExprError, ValueError) as exc:
                problems.append((lineno, str(exc)))
                continue
            add(node, lineno)
        else:
            problems.append((lineno, f"syntax error: {line!r}"))

    if name is None:
        problems.append((0, "missing 'machine NAME' declaration"))
    if INPUT_ID not in nodes or not isinstance(nodes.get(INPUT_ID), InputNode):
        problems.append((0, "missing 'input ARITY -> NODE' declaration"))
    else:
        problems.extend(_validate(nodes))
    if problems:
        raise MachineError(sorted(problems, key=lambda p: p[0]))
    ordered = {INPUT_ID: nodes[INPUT_ID]}
    ordered.update((k, v) for k, v in nodes.items() if k != INPUT_ID)
    return Machine(name, ordered, INPUT_ID, total)


def _parse_node(node_id: str, kind: str, rest: str, lineno: int) -> Node:
    if kind == "compute":
        body, target = _RE_GOTO.match(rest).groups()
        if not target:
            raise ValueError(f"out-degree violation: computation node {node_id!r} needs exactly one output edge ('goto ID')")
        assignments = []
        seen = set()
        for part in body.split(","):
            m = _RE_ASSIGN.match(part.strip())
            if not m:
                raise ValueError(f"bad assignment {part.strip()!r} in node {node_id!r}")
            index = int(m.group(1) if m.group(1) is not None else m.group(2))
            if index in seen:
                raise ValueError(f"coordinate x{index} assigned twice in node {node_id!r}")
            seen.add(index)
            assignments.append((index, parse_expr(m.group(3))))
        return ComputeNode(node_id, tuple(assignments), target, lineno)
    if kind == "branch":
        m = re.match(r"^(.*?)\s*\?\s*(\S*)\s*(?::\s*(\S*))?\s*$", rest)
        if not m:
            raise ValueError(f"out-degree violation: branch node {node_id!r} needs exactly two output edges ('? ID1 : ID0')")
        expr_text, edge1, edge0 = m.groups()
        if not edge1 or not edge0:
            raise ValueError(
                f"out-degree violation: branch node {node_id!r} must have exactly two output edges ('? ID1 : ID0')"
            )
        test = parse_expr(expr_text)
        if not test.is_polynomial():
            raise ValueError(f"branch test of node {node_id!r} must be a polynomial")
        return BranchNode(node_id, test.num, edge1, edge0, lineno)
    if kind == "shift":
        m = re.match(r"^(left|right)\s*(?:goto\s*(\S*))?$", rest)
        if not m:
            raise ValueError(f"shift node {node_id!r} needs a direction 'left' or 'right'")
        if not m.group(2):
            raise ValueError(f"out-degree violation: shift node {node_id!r} needs exactly one output edge ('goto ID')")
        return ShiftNode(node_id, m.group(1), m.group(2), lineno)
    if kind == "output":
        if "goto" in rest:
            raise ValueError(f"out-degree violation: output node {node_id!r} has no output edges")
        m = re.match(r"^\[\s*(.*?)\s*\]$", rest)
        if not m:
            raise ValueError(f"output node {node_id!r} needs a coordinate list '[i, j, ...]'")
        coords = tuple(int(c) for c in m.group(1).split(",") if c.strip()) if m.group(1) else ()
        return OutputNode(node_id, coords, lineno)
    raise ValueError(f"unknown node kind {kind!r}")


def _validate(nodes: dict) -> list[tuple[int, str]]:
    problems = []
    for node in nodes.values():
        for target in node.successors():
            if target not in nodes:
                problems.append((node.line, f"unknown node reference {target!r} in node {node.id!r}"))
            elif target == INPUT_ID:
                problems.append((node.line, f"node {node.id!r} points at the input node, which has no incoming edges"))
    # weak connectivity from the input node
    adjacent: dict[str, set] = {k: set() for k in nodes}
    for node in nodes.values():
        for target in node.successors():
            if target in nodes:
                adjacent[node.id].add(target)
                adjacent[target].add(node.id)
    seen = {INPUT_ID}
    stack = [INPUT_ID]
    while stack:
        for nxt in adjacent[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    for node in nodes.values():
        if node.id not in seen:
            problems.append((node.line, f"node {node.id!r} is not connected to the machine graph"))
    return problems


def load_machine(path) -> Machine:
    with open(path, encoding="utf-8") as fh:
        return parse_machine(fh.read())


# --- execution -----------------------------------------------------------


@dataclass(frozen=True)
class Configuration:
    node: str
    state: RInfinity
    step_count: int


@dataclass(frozen=True)
class Output:
    values: tuple[Fraction, ...]


@dataclass(frozen=True)
class Undefined:
    reason: Literal["division-by-zero", "malformed-output"]


@dataclass(frozen=True)
class Diverged:
    fuel: int


RunResult = Union[Output, Undefined, Diverged]


@dataclass(frozen=True)
class Trace:
    steps: tuple[Configuration, ...]
    result: RunResult


def initial_configuration(m: Machine, values: Sequence) -> Configuration:
    """The raw input sits at coordinates ``0..n-1`` until the input node fires."""
    values = tuple(Fraction(v) for v in values)
    if len(values) != m.arity:
        raise ValueError(f"machine {m.name!r} expects {m.arity} inputs, got {len(values)}")
    return Configuration(m.input_node, RInfinity.from_values(values), 0)


def embed_input(values: Sequence) -> RInfinity:
    values = tuple(values)
    return RInfinity({0: len(values), **{k + 1: v for k, v in enumerate(values)}})


def step(m: Machine, c: Configuration) -> Union[Configuration, RunResult]:
    node = m.nodes[c.node]
    x = c.state
    n = c.step_count + 1
    if isinstance(node, InputNode):
        raw = [x[k] for k in range(node.arity)]
        return Configuration(node.next, embed_input(raw), n)
    if isinstance(node, ComputeNode):
        try:
            changes = {i: fn.evaluate(x) for i, fn in node.assignments}
        except ZeroDivisionError:
            return Undefined("division-by-zero")
        return Configuration(node.next, x.updated(changes), n)
    if isinstance(node, BranchNode):
        target = node.on_nonneg if node.test.evaluate(x) >= 0 else node.on_neg
        return Configuration(target, x, n)
    if isinstance(node, ShiftNode):
        # left: y_i = x_{i+1}, so the entry at i+1 moves down to i
        return Configuration(node.next, x.shifted(-1 if node.direction == "left" else 1), n)
    if isinstance(node, OutputNode):
        return Output(tuple(x[i] for i in node.coords))
    raise TypeError(f"unknown node {node!r}")


def trace(m: Machine, values: Sequence, fuel: int) -> Trace:
    """Record at most ``fuel`` configurations of the unique computation."""
    if fuel < 1:
        raise ValueError("fuel must be at least 1")
    c = initial_configuration(m, values)
    steps = [c]
    while True:
        nxt = step(m, c)
        if not isinstance(nxt, Configuration):
            return Trace(tuple(steps), nxt)
        if len(steps) == fuel:
            return Trace(tuple(steps), Diverged(fuel))
        steps.append(nxt)
        c = nxt


def run(m: Machine, values: Sequence, fuel: int) -> RunResult:
    if fuel < 1:
        raise ValueError("fuel must be at least 1")
    c = initial_configuration(m, values)
    count = 1
    while True:
        nxt = step(m, c)
        if not isinstance(nxt, Configuration):
            return nxt
        if count == fuel:
            return Diverged(fuel)
        count += 1
        c = nxt


def result_to_json(result: RunResult) -> dict:
    if isinstance(result, Output):
        return {"kind": "output", "values": [format_pq(v) for v in result.values]}
    if isinstance(result, Undefined):
        return {"kind": "undefined", "reason": result.reason}
    return {"kind": "diverged", "fuel": result.fuel}


def trace_to_json(m: Machine, tr: Trace) -> dict:
    return {
        "machine": m.name,
        "steps": [
            {"node": c.node, "state": {str(i): format_pq(c.state[i]) for i in c.state.support()}}
            for c in tr.steps
        ],
        "result": result_to_json(tr.result),
    }
