"""From BSS machines to Σ-definitions over HF(R), and back to search.

A machine's graph is presented by one trace-existence formula::

    exists c . ValidTrace(c, x, y)

``x`` and ``y`` are tuple codes (length at index 0, then the values).
``c`` is a set of records ``{slot0: stage, slot1: node, slot2: state,
slot3: aux}``; ``state`` is a coded configuration and ``aux`` a set of atoms
holding the intermediate values of the node's polynomials, which every
step re-derives with the field predicates. ValidTrace is Δ₀:

* every reading of every record is either the start (stage 0, input node,
  state = x) or has a record one stage earlier that steps to it;
* some record sits at an output node and its output tuple is ``y``.

Readings are chained downwards by stage, so each one equals the actual
configuration at that stage; see the tests for the witness side.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional, Sequence

from .coding import code_tuple, decode, decode_tuple, encode, encode_seq
from .formula import (
    TRUE,
    Base,
    BoundedExists,
    BoundedForall,
    Equal,
    Exists,
    Formula,
    FormulaError,
    LiftingError,
    Lit,
    Member,
    Not,
    SearchBudget,
    SigmaResult,
    Var,
    eval_delta0,
    eval_sigma,
    format_formula,
    is_delta0,
    parse_formula,
    prefix_bound,
    substitute,
)
from .hf import EMPTY, Atom, HFSet, HSet
from .machine import (
    BranchNode,
    ComputeNode,
    InputNode,
    Machine,
    Output,
    OutputNode,
    ShiftNode,
    embed_input,
    run,
    trace,
)
from .macros import (
    AtomVar,
    Coord,
    Names,
    atom_lit,
    conj,
    disj,
    entry_elem_exists,
    entry_elem_forall,
    entry_exists,
    entry_forall,
    field_exists,
    field_forall,
    read_coord,
    slot,
    sq,
    sv,
    tuple_is,
)
from .poly import Poly
from .rinf import RInfinity

__all__ = [
    "TotalityError",
    "SigmaFunctionDef",
    "graph_formula",
    "trace_code",
    "compose_formula",
    "juxtapose_formula",
    "primrec_formula",
    "mu_formula",
    "SigmaScheme",
    "structure_presentation",
    "sigma_semidecide",
    "MPrimeElement",
    "MPrime",
    "build_m_prime",
    "vector_candidates",
    "format_presentation",
    "format_function",
    "parse_presentation",
]

DEFAULT_FUEL = 10_000


class TotalityError(ValueError):
    """A complement was requested without the totality it relies on."""


# ------------------------------------------------ straight-line programs


@dataclass(frozen=True)
class _Slp:
    """Temporaries ``t0, t1, ...``; ops are ('read', i), ('const', q),
    ('add', a, b), ('mul', a, b)."""

    ops: tuple
    results: tuple  # temp index per compiled polynomial

    def run(self, state: RInfinity) -> list[Fraction]:
        vals: list[Fraction] = []
        for op in self.ops:
            if op[0] == "read":
                vals.append(state[op[1]])
            elif op[0] == "const":
                vals.append(op[1])
            elif op[0] == "add":
                vals.append(vals[op[1]] + vals[op[2]])
            else:
                vals.append(vals[op[1]] * vals[op[2]])
        return vals


def _compile(polys: Sequence[Poly]) -> _Slp:
    ops: list = []
    memo: dict = {}

    def emit(op) -> int:
        if op not in memo:
            memo[op] = len(ops)
            ops.append(op)
        return memo[op]

    results = []
    for poly in polys:
        acc = None
        for mono, coef in sorted(poly.terms.items()):
            term = None if coef == 1 else emit(("const", coef))
            for var, exp in mono:
                r = emit(("read", var))
                for _ in range(exp):
                    term = r if term is None else emit(("mul", term, r))
            if term is None:
                term = emit(("const", Fraction(1)))
            acc = term if acc is None else emit(("add", acc, term))
        results.append(emit(("const", Fraction(0))) if acc is None else acc)
    return _Slp(tuple(ops), tuple(results))


def _node_slp(node) -> Optional[_Slp]:
    if isinstance(node, ComputeNode):
        polys = []
        for _, fn in node.assignments:
            polys.append(fn.num)
            if not fn.is_polynomial():
                polys.append(fn.den)
        return _compile(polys)
    if isinstance(node, BranchNode):
        return _compile([node.test])
    return None


def _with_temps(slp: _Slp, aux: str, state: str, core: Callable[[list[str]], Formula], names: Names) -> Formula:
    """Bind every temporary to an atom of ``aux`` satisfying its defining op."""
    temps = [names("t") for _ in slp.ops]
    body = core(temps)
    for k in range(len(slp.ops) - 1, -1, -1):
        op = slp.ops[k]
        t = temps[k]
        if op[0] == "read":
            check = read_coord(state, op[1], t, names)
        elif op[0] == "const":
            check = Equal(Var(t), atom_lit(op[1]))
        else:
            check = Base("add" if op[0] == "add" else "mul", (sv(temps[op[1]]), sv(temps[op[2]]), sv(t)))
        body = BoundedExists(t, Var(aux), conj(check, body))
    return body


# ------------------------------------------------------- node semantics


def _step_formula(m: Machine, node, s0: str, a0: str, nd: str, s1: str, names: Names) -> Formula:
    """One transition from ``node`` with state ``s0`` (temps in ``a0``) to
    node index ``nd`` and state ``s1``."""
    goto = lambda target: Equal(Var(nd), atom_lit(m.node_index(target)))  # noqa: E731
    if isinstance(node, InputNode):
        return conj(goto(node.next), Equal(Var(s1), Var(s0)))
    if isinstance(node, ShiftNode):
        i, v, j, u = names("i"), names("v"), names("j"), names("u")
        # left: y_i = x_{i+1}; right: y_i = x_{i-1}
        if node.direction == "left":
            link = lambda a, b: Base("add", (sv(a), sq(1), sv(b)))  # noqa: E731
        else:
            link = lambda a, b: Base("add", (sv(b), sq(1), sv(a)))  # noqa: E731
        fwd = entry_forall(
            s1, i, v, entry_exists(s0, j, u, conj(link(i, j), Equal(Var(u), Var(v))), names), names
        )
        i2, v2, j2, u2 = names("i"), names("v"), names("j"), names("u")
        back = entry_forall(
            s0, j2, u2, entry_exists(s1, i2, v2, conj(link(i2, j2), Equal(Var(u2), Var(v2))), names), names
        )
        return conj(goto(node.next), fwd, back)
    slp = _node_slp(node)
    if isinstance(node, BranchNode):
        def branch_core(temps):
            h = sv(temps[slp.results[0]])
            neg = Base("less", (h, sq(0)))
            return conj(
                Equal(Var(s1), Var(s0)),
                disj(conj(Not(neg), goto(node.on_nonneg)), conj(neg, goto(node.on_neg))),
            )

        return _with_temps(slp, a0, s0, branch_core, names)
    if isinstance(node, ComputeNode):
        return _with_temps(slp, a0, s0, lambda temps: _compute_core(m, node, slp, temps, s0, nd, s1, names), names)
    raise TypeError(f"no step from {node!r}")


def _compute_core(m, node: ComputeNode, slp: _Slp, temps, s0, nd, s1, names: Names) -> Formula:
    window = []
    r = iter(slp.results)
    for index, fn in node.assignments:
        p = temps[next(r)]
        q = None if fn.is_polynomial() else temps[next(r)]
        window.append((index, p, q))

    def value_ok(v: str, p: str, q: Optional[str]) -> Formula:
        if q is None:
            return Equal(Var(v), Var(p))
        return Base("mul", (sv(v), sv(q), sv(p)))

    def in_window(i: str) -> Formula:
        return disj(*[Equal(Var(i), atom_lit(idx)) for idx, _, _ in window])

    i, v = names("i"), names("v")
    # (a) every entry of the new state is either untouched or a fresh window value
    new_entries = []
    for idx, p, q in window:
        new_entries.append(conj(Equal(Var(i), atom_lit(idx)), Not(Base("iszero", (sv(v),))), value_ok(v, p, q)))
    p_var = names("p")
    a_part = BoundedForall(
        p_var, Var(s1),
        conj(
            entry_elem_exists(p_var, names("i"), names("v"), TRUE, names),
            entry_elem_forall(
                p_var, i, v,
                disj(conj(Not(in_window(i)), Member(Var(p_var), Var(s0))), *new_entries),
                names,
            ),
        ),
    )
    # (b) entries outside the window carry over
    j, u, q_var = names("j"), names("u"), names("p")
    b_part = BoundedForall(
        q_var, Var(s0),
        entry_elem_forall(q_var, j, u, disj(in_window(j), Member(Var(q_var), Var(s1))), names),
    )
    # (c) each window value is defined and present exactly when nonzero
    c_parts = []
    for idx, p, q in window:
        i1, v1, i2, v2 = names("i"), names("v"), names("i"), names("v")
        present = entry_exists(s1, i1, v1, conj(Equal(Var(i1), atom_lit(idx)), value_ok(v1, p, q)), names)
        absent = conj(
            Base("iszero", (sv(p),)),
            Not(entry_exists(s1, i2, v2, Equal(Var(i2), atom_lit(idx)), names)),
        )
        defined = [] if q is None else [Not(Base("iszero", (sv(q),)))]
        c_parts.append(conj(*defined, disj(present, absent)))
    return conj(Equal(Var(nd), atom_lit(m.node_index(node.next))), *c_parts, a_part, b_part)


def _output_formula(node: OutputNode, state: str, y: str, names: Names) -> Formula:
    return tuple_is(y, [Coord(state, c) for c in node.coords], names)


def _trace_body(m: Machine, c: str, x: str, y: str, names: Names, negate_output: bool) -> Formula:
    r, s, nd, st = names("r"), names("s"), names("n"), names("S")
    r0, s0, nd0, st0, a0 = names("r"), names("s"), names("n"), names("S"), names("A")
    steps = []
    for node in m.nodes.values():
        if isinstance(node, OutputNode):
            continue
        steps.append(
            conj(Equal(Var(nd0), atom_lit(m.node_index(node.id))), _step_formula(m, node, st0, a0, nd, st, names))
        )
    start = conj(
        Base("iszero", (sv(s),)),
        Equal(Var(nd), atom_lit(m.node_index(m.input_node))),
        Equal(Var(st), Var(x)),
    )
    previous = BoundedExists(
        r0, Var(c),
        field_exists(
            r0, 0, s0,
            conj(
                Base("add", (sv(s0), sq(1), sv(s))),
                field_exists(r0, 1, nd0, field_exists(r0, 2, st0, field_exists(r0, 3, a0, disj(*steps), names), names), names),
            ),
            names,
        ),
    )
    chained = BoundedForall(
        r, Var(c),
        field_forall(r, 0, s, field_forall(r, 1, nd, field_forall(r, 2, st, disj(start, previous), names), names), names),
    )
    ro, ndo, sto = names("r"), names("n"), names("S")
    outs = []
    for node in m.output_nodes():
        check = _output_formula(node, sto, y, names)
        outs.append(conj(Equal(Var(ndo), atom_lit(m.node_index(node.id))), Not(check) if negate_output else check))
    halted = BoundedExists(ro, Var(c), field_exists(ro, 1, ndo, field_exists(ro, 2, sto, disj(*outs), names), names))
    return conj(halted, chained)


def _record(stage: int, node_index: int, state: RInfinity, aux) -> HSet:
    return HSet((
        slot(0, Atom(stage)),
        slot(1, Atom(node_index)),
        slot(2, encode_seq(state)),
        slot(3, HSet(Atom(a) for a in aux)),
    ))


def trace_code(m: Machine, values: Sequence, fuel: int = DEFAULT_FUEL) -> Optional[HSet]:
    """The witness ``c`` for ValidTrace at ``values``, or None if the run
    does not reach an output within ``fuel`` configurations."""
    tr = trace(m, values, fuel)
    if not isinstance(tr.result, Output):
        return None
    records = []
    # stage 0 is the input node holding the already embedded input
    configs = [(m.input_node, embed_input([Fraction(v) for v in values]))]
    configs += [(c.node, c.state) for c in tr.steps[1:]]
    for stage, (node_id, state) in enumerate(configs):
        slp = _node_slp(m.nodes[node_id])
        aux = slp.run(state) if slp else ()
        records.append(_record(stage, m.node_index(node_id), state, aux))
    return HSet(records)


# ------------------------------------------------------ Σ-function defs

Hints = dict


def _merge(*dicts: Mapping) -> Hints:
    out: Hints = {}
    for d in dicts:
        for k, vals in d.items():
            bucket = out.setdefault(k, [])
            for v in vals:
                if v not in bucket:
                    bucket.append(v)
    return out


def _prefixed(hints: Mapping, prefix: str) -> Hints:
    return {prefix + k: list(v) for k, v in hints.items()}


@dataclass
class SigmaFunctionDef:
    """Graph (and optionally complement) of a function as Σ formulas in the
    free variables ``x`` (input tuple code) and ``y`` (output tuple code).

    ``oracle`` computes the function directly and ``hint_fn`` proposes
    witnesses for the search; neither is trusted, every True is re-verified.
    """

    name: str
    graph: Formula
    cograph: Optional[Formula]
    arity: int
    out_arity: int
    oracle: Callable[[tuple], Optional[tuple]] = field(repr=False, default=lambda v: None)
    hint_fn: Callable[[tuple], Hints] = field(repr=False, default=lambda v: {})

    def env(self, values: Sequence, outputs: Sequence) -> dict:
        return {"x": code_tuple(values), "y": code_tuple(outputs)}

    def budget(self, values: Sequence, base: Optional[SearchBudget] = None) -> SearchBudget:
        base = base or SearchBudget(max_witnesses=64)
        hints = _merge(base.hints, self.hint_fn(tuple(Fraction(v) for v in values)))
        return SearchBudget(base.max_witnesses, base.atom_pool, base.max_rank, hints)

    def check_graph(self, values: Sequence, outputs: Sequence, budget: Optional[SearchBudget] = None) -> SigmaResult:
        return eval_sigma(self.graph, self.env(values, outputs), self.budget(values, budget))

    def check_cograph(self, values: Sequence, outputs: Sequence, budget: Optional[SearchBudget] = None) -> SigmaResult:
        if self.cograph is None:
            raise TotalityError(f"{self.name}: no complement formula")
        return eval_sigma(self.cograph, self.env(values, outputs), self.budget(values, budget))


def graph_formula(m: Machine, total: bool = False, want_cograph: bool = False, fuel: int = DEFAULT_FUEL) -> SigmaFunctionDef:
    """Σ presentation of the input/output function of ``m``.

    The complement is produced when totality is declared (``total`` or the
    machine's ``total`` directive): without it a missing output could mean
    divergence, which no finite trace exhibits.
    """
    declared = total or m.total
    if want_cograph and not declared:
        raise TotalityError(
            f"machine {m.name!r} is not declared total; its complement is not presented by a finite trace"
        )
    names = Names()
    graph = Exists("c", _trace_body(m, "c", "x", "y", names, negate_output=False))
    cograph = Exists("c", _trace_body(m, "c", "x", "y", names, negate_output=True)) if declared else None
    outs = {len(o.coords) for o in m.output_nodes()}
    out_arity = outs.pop() if len(outs) == 1 else -1

    def oracle(values):
        if len(values) != m.arity:
            return None
        res = run(m, values, fuel)
        return res.values if isinstance(res, Output) else None

    def hint_fn(values):
        if len(values) != m.arity:
            return {}
        c = trace_code(m, values, fuel)
        return {"c": [c]} if c is not None else {}

    return SigmaFunctionDef(m.name, graph, cograph, m.arity, out_arity, oracle, hint_fn)


def _instantiate(f: Formula, prefix: str, x, y) -> Formula:
    return substitute(prefix_bound(f, prefix), {"x": x, "y": y})


def compose_formula(f: SigmaFunctionDef, g: SigmaFunctionDef) -> SigmaFunctionDef:
    """``f`` after ``g``: exists z (G_g(x, z) and G_f(z, y))."""
    if g.out_arity != f.arity:
        raise ValueError(f"cannot compose: {g.name} yields {g.out_arity} values, {f.name} takes {f.arity}")
    z = Var("z")
    graph = Exists("z", conj(_instantiate(g.graph, "g.", Var("x"), z), _instantiate(f.graph, "f.", z, Var("y"))))
    cograph = None
    if f.cograph is not None and g.cograph is not None:
        cograph = Exists("z", conj(_instantiate(g.graph, "g.", Var("x"), z), _instantiate(f.cograph, "f.", z, Var("y"))))

    def oracle(values):
        mid = g.oracle(values)
        return None if mid is None else f.oracle(mid)

    def hint_fn(values):
        mid = g.oracle(values)
        hints = _prefixed(g.hint_fn(values), "g.")
        if mid is not None:
            hints = _merge(hints, {"z": [code_tuple(mid)]}, _prefixed(f.hint_fn(mid), "f."))
        return hints

    return SigmaFunctionDef(f"({f.name} o {g.name})", graph, cograph, g.arity, f.out_arity, oracle, hint_fn)


def juxtapose_formula(f: SigmaFunctionDef, g: SigmaFunctionDef) -> SigmaFunctionDef:
    """``x -> (f(x), g(x))``: both graphs on the shared input, outputs concatenated."""
    if f.arity != g.arity:
        raise ValueError(f"cannot juxtapose: arities {f.arity} and {g.arity} differ")
    names = Names("jx.")
    sources = [Coord("u", k) for k in range(1, f.out_arity + 1)] + [Coord("w", k) for k in range(1, g.out_arity + 1)]
    concat = tuple_is("y", sources, names)
    both = conj(_instantiate(f.graph, "f.", Var("x"), Var("u")), _instantiate(g.graph, "g.", Var("x"), Var("w")))
    graph = Exists("u", Exists("w", conj(both, concat)))
    cograph = None
    if f.cograph is not None and g.cograph is not None:
        cograph = Exists("u", Exists("w", conj(both, Not(concat))))

    def oracle(values):
        a, b = f.oracle(values), g.oracle(values)
        return None if a is None or b is None else tuple(a) + tuple(b)

    def hint_fn(values):
        a, b = f.oracle(values), g.oracle(values)
        hints = _merge(_prefixed(f.hint_fn(values), "f."), _prefixed(g.hint_fn(values), "g."))
        if a is not None:
            hints = _merge(hints, {"u": [code_tuple(a)]})
        if b is not None:
            hints = _merge(hints, {"w": [code_tuple(b)]})
        return hints

    return SigmaFunctionDef(f"<{f.name}, {g.name}>", graph, cograph, f.arity, f.out_arity + g.out_arity, oracle, hint_fn)


def _pr_record(stage: int, result: HFSet, args: HFSet) -> HSet:
    return HSet((slot(0, Atom(stage)), slot(1, result), slot(2, args)))


def primrec_formula(g: SigmaFunctionDef, h: SigmaFunctionDef) -> SigmaFunctionDef:
    """``f(0, xs) = g(xs)``, ``f(t+1, xs) = h(t, f(t, xs), xs)``.

    The witness ``c`` is the course of values: records ``(stage, result
    code, argument code)`` for stages ``0..t``, each argument code tied to
    ``x`` and to the previous stage by a Δ₀ tuple check.
    """
    if g.cograph is None or h.cograph is None:
        raise TotalityError("primitive recursion needs complements of g and h")
    k = g.arity + 1
    if h.arity != k + 1 or g.out_arity != 1 or h.out_arity != 1:
        raise ValueError("primitive recursion expects g: k-1 -> 1 and h: k+1 -> 1")
    names = Names("pr.")
    r, s, res, arg = names("r"), names("s"), names("R"), names("X")
    r0, s0, res0 = names("r"), names("s"), names("R")
    rest = [Coord("x", j) for j in range(2, k + 1)]
    base = conj(
        Base("iszero", (sv(s),)),
        tuple_is(arg, rest, names),
        _instantiate(g.graph, "g.", Var(arg), Var(res)),
    )
    succ = BoundedExists(
        r0, Var("c"),
        field_exists(
            r0, 0, s0,
            conj(
                Base("add", (sv(s0), sq(1), sv(s))),
                field_exists(
                    r0, 1, res0,
                    conj(
                        tuple_is(arg, [AtomVar(s0), Coord(res0, 1)] + rest, names),
                        _instantiate(h.graph, "h.", Var(arg), Var(res)),
                    ),
                    names,
                ),
            ),
            names,
        ),
    )
    chain = BoundedForall(
        r, Var("c"),
        field_forall(r, 0, s, field_forall(r, 1, res, field_forall(r, 2, arg, disj(base, succ), names), names), names),
    )

    def final(negate: bool) -> Formula:
        rf, sf, resf = names("r"), names("s"), names("R")
        same = Equal(Var(resf), Var("y"))
        return BoundedExists(
            rf, Var("c"),
            field_exists(
                rf, 0, sf,
                conj(read_coord("x", 1, sf, names), field_exists(rf, 1, resf, Not(same) if negate else same, names)),
                names,
            ),
        )

    graph = Exists("c", conj(final(False), chain))
    cograph = Exists("c", conj(final(True), chain))

    def course(values):
        t, xs = values[0], tuple(values[1:])
        if t.denominator != 1 or t < 0:
            return None
        out = g.oracle(xs)
        if out is None:
            return None
        steps = [(xs, out)]
        for stage in range(int(t)):
            args = (Fraction(stage), out[0]) + xs
            out = h.oracle(args)
            if out is None:
                return None
            steps.append((args, out))
        return steps

    def oracle(values):
        steps = course(values)
        return None if steps is None else steps[-1][1]

    def hint_fn(values):
        steps = course(values)
        if steps is None:
            return {}
        c = HSet(_pr_record(st, code_tuple(out), code_tuple(args)) for st, (args, out) in enumerate(steps))
        hints = {"c": [c]}
        hints = _merge(hints, _prefixed(g.hint_fn(steps[0][0]), "g."))
        for args, _ in steps[1:]:
            hints = _merge(hints, _prefixed(h.hint_fn(args), "h."))
        return hints

    return SigmaFunctionDef(f"primrec({g.name}, {h.name})", graph, cograph, k, 1, oracle, hint_fn)


def mu_formula(phi: SigmaFunctionDef) -> SigmaFunctionDef:
    """Least natural ``t`` with ``F(t, xs) = 0``.

    Θ(xs, t) = F(t, xs) = 0 and, for every s in t, F(s, xs) != 0, with the
    complement formula standing in for the negated graph and ``s in t``
    read over a set ``W`` checked by Δ₀ means to be exactly ``{0, ..., t-1}``.
    """
    if phi.cograph is None:
        raise TotalityError("minimisation needs the complement of F")
    if phi.out_arity != 1:
        raise ValueError("minimisation expects a single-valued F")
    k = phi.arity - 1
    names = Names("mu.")
    zero = Lit(code_tuple((0,)))
    xs = [Coord("x", j) for j in range(1, k + 1)]
    t_src = Coord("y", 1)
    u, u2, i, v = names("u"), names("u"), names("i"), names("v")
    i0, v0 = names("i"), names("v")
    is_t = lambda a: entry_exists(  # noqa: E731
        "y", i, v, conj(Equal(Var(i), atom_lit(1)), Base("add", (sv(a), sq(1), sv(v)))), names
    )
    nats = conj(
        tuple_is("y", [t_src], names),
        disj(
            conj(Equal(Var("W"), Lit(EMPTY)), Not(entry_exists("y", i0, v0, Equal(Var(i0), atom_lit(1)), names))),
            Member(atom_lit(0), Var("W")),
        ),
        BoundedForall(u, Var("W"), disj(BoundedExists(u2, Var("W"), Base("add", (sv(u), sq(1), sv(u2)))), is_t(u))),
        BoundedForall(
            u, Var("W"),
            disj(Base("iszero", (sv(u),)), BoundedExists(u2, Var("W"), Base("add", (sv(u2), sq(1), sv(u))))),
        ),
    )
    s = names("s")
    hits = conj(tuple_is("A", [t_src] + xs, names), _instantiate(phi.graph, "F.", Var("A"), zero))
    below = BoundedForall(
        s, Var("W"),
        Exists("B", conj(tuple_is("B", [AtomVar(s)] + xs, names), _instantiate(phi.cograph, "G.", Var("B"), zero))),
    )
    graph = Exists("W", conj(nats, Exists("A", conj(hits, below))))

    def search(values, limit=10_000):
        for t in range(limit):
            out = phi.oracle((Fraction(t),) + tuple(values))
            if out is None:
                return None
            if out[0] == 0:
                return t
        return None

    def oracle(values):
        t = search(values)
        return None if t is None else (Fraction(t),)

    def hint_fn(values):
        t = search(values)
        if t is None:
            return {}
        hints = {"W": [HSet(Atom(j) for j in range(t))], "A": [code_tuple((t,) + tuple(values))]}
        hints = _merge(hints, _prefixed(phi.hint_fn((Fraction(t),) + tuple(values)), "F."))
        for j in range(t):
            args = (Fraction(j),) + tuple(values)
            hints = _merge(hints, {"B": [code_tuple(args)]}, _prefixed(phi.hint_fn(args), "G."))
        return hints

    return SigmaFunctionDef(f"mu({phi.name})", graph, None, k, 1, oracle, hint_fn)


# ------------------------------------------------------ structures

_VAR = "x{}".format


def _selector_arity(scheme: "SigmaScheme", selector: str) -> int:
    if selector in ("psi0", "psi0*"):
        return 1
    if selector in ("psi1", "psi1*"):
        return 2
    kind, _, name = selector.partition(":")
    if kind in ("phi", "phi*") and name in scheme.signature:
        return scheme.signature[name]
    raise KeyError(f"unknown relation selector {selector!r}")


@dataclass
class SigmaScheme:
    """Σ presentation of a structure with one HF coordinate per element.

    Relations are addressed by selector: ``psi0``, ``psi0*``, ``psi1``,
    ``psi1*``, ``phi:NAME`` and ``phi*:NAME``. Formulas use the free
    variables ``x1, x2, ...``. ``hint_fns`` optionally propose witnesses
    for a selector given its arguments.
    """

    psi0: Formula
    psi0_star: Formula
    psi1: Formula
    psi1_star: Formula
    phi: dict  # name -> (Φ, Φ*)
    signature: dict  # name -> arity
    hint_fns: dict = field(default_factory=dict, repr=False)

    def formula(self, selector: str) -> Formula:
        fixed = {"psi0": self.psi0, "psi0*": self.psi0_star, "psi1": self.psi1, "psi1*": self.psi1_star}
        if selector in fixed:
            return fixed[selector]
        kind, _, name = selector.partition(":")
        if kind in ("phi", "phi*") and name in self.phi:
            return self.phi[name][0 if kind == "phi" else 1]
        raise KeyError(f"unknown relation selector {selector!r}")

    def selectors(self) -> list[str]:
        out = ["psi0", "psi0*", "psi1", "psi1*"]
        for name in self.phi:
            out += [f"phi:{name}", f"phi*:{name}"]
        return out

    def env(self, args: Sequence[HFSet]) -> dict:
        return {_VAR(i): a for i, a in enumerate(args, start=1)}

    def hints(self, selector: str, args: Sequence[HFSet]) -> Hints:
        fn = self.hint_fns.get(selector)
        return fn(tuple(args)) if fn else {}

    def evaluate(self, selector: str, args: Sequence[HFSet], budget: Optional[SearchBudget] = None) -> SigmaResult:
        """Plain Σ search (hints first) on one relation, without the Ψ₀ guard."""
        if len(args) != _selector_arity(self, selector):
            raise ValueError(f"{selector} takes {_selector_arity(self, selector)} arguments")
        budget = budget or SearchBudget()
        hints = _merge(budget.hints, self.hints(selector, args))
        b = SearchBudget(budget.max_witnesses, budget.atom_pool, budget.max_rank, hints)
        return eval_sigma(self.formula(selector), self.env(args), b)


def _characteristic(m: Machine, inputs: list, value: int, names: Names) -> Formula:
    """G_m(inputs, code((value,))) for elements coded as 1-tuples."""
    out = Lit(code_tuple((value,)))
    if len(inputs) == 1:
        return substitute(graph_formula(m, total=True).graph, {"x": Var(inputs[0]), "y": out})
    graph = substitute(graph_formula(m, total=True).graph, {"x": Var("X"), "y": out})
    return Exists("X", conj(tuple_is("X", [Coord(v, 1) for v in inputs], names), graph))


def _machine_hints(m: Machine, fuel: int) -> Callable:
    def hint_fn(args):
        values = []
        for a in args:
            t = decode_tuple(a)
            if t is None or len(t) != 1:
                return {}
            values.append(t[0])
        c = trace_code(m, values, fuel)
        hints = {"X": [code_tuple(values)]}
        if c is not None:
            hints["c"] = [c]
        return hints

    return hint_fn


def structure_presentation(machines: Mapping[str, Machine], fuel: int = DEFAULT_FUEL) -> SigmaScheme:
    """Scheme of the structure decided by characteristic-function machines.

    ``machines["universe"]`` decides the universe; every other entry names a
    relation of the machine's arity. Elements are coded as 1-tuples
    ``code((q,))``; Ψ₁ is equality of codes.
    """
    if "universe" not in machines:
        raise KeyError("a 'universe' machine is required")
    for name, m in machines.items():
        if not m.total:
            raise TotalityError(f"machine {name!r} must be declared total to present a relation")
    names = Names("st.")
    u = machines["universe"]
    if u.arity != 1:
        raise ValueError("the universe machine takes one input")
    phi, signature = {}, {}
    hint_fns = {"psi0": _machine_hints(u, fuel), "psi0*": _machine_hints(u, fuel)}
    for name, m in machines.items():
        if name == "universe":
            continue
        xs = [_VAR(i) for i in range(1, m.arity + 1)]
        phi[name] = (_characteristic(m, xs, 1, names), _characteristic(m, xs, 0, names))
        signature[name] = m.arity
        hint_fns[f"phi:{name}"] = hint_fns[f"phi*:{name}"] = _machine_hints(m, fuel)
    same = Equal(Var("x1"), Var("x2"))
    return SigmaScheme(
        psi0=_characteristic(u, ["x1"], 1, names),
        psi0_star=_characteristic(u, ["x1"], 0, names),
        psi1=same,
        psi1_star=Not(same),
        phi=phi,
        signature=signature,
        hint_fns=hint_fns,
    )


# ------------------------------------------------------ semidecision


def vector_candidates(pool: Sequence, window: int) -> list[RInfinity]:
    """Vectors supported in ``[0, window)`` with values in ``pool`` (zero
    allowed), smallest support first."""
    values = sorted({Fraction(q) for q in pool} | {Fraction(0)}, key=lambda q: (q != 0, abs(q), q < 0))
    out = [RInfinity(dict(zip(range(window), combo))) for combo in itertools.product(values, repeat=window)]
    out.sort(key=lambda v: len(v.support()))
    return out


def _prenex(f: Formula) -> tuple[list[str], Formula]:
    quantified = []
    while isinstance(f, Exists):
        quantified.append(f.var)
        f = f.body
    return quantified, f


def _unfold(
    f: Formula, env: dict, hints: Mapping, budget: SearchBudget, window: int
) -> SigmaResult:
    quantified, matrix = _prenex(f)
    if not is_delta0(matrix):
        return eval_sigma(f, env, SearchBudget(budget.max_witnesses, budget.atom_pool, budget.max_rank, dict(hints)))
    if not quantified:
        ok = eval_delta0(matrix, env)
        return SigmaResult("true" if ok else "unknown", {}, matrix if ok else None, 0)
    coded = [encode(v) for v in vector_candidates(budget.atom_pool, window)]
    pools = []
    for var in quantified:
        own = list(hints.get(var, ()))
        pools.append(own + [c for c in coded if c not in own])
    trials = 0
    scope = dict(env)
    for combo in itertools.product(*pools):
        if trials >= budget.max_witnesses:
            break
        trials += 1
        scope.update(zip(quantified, combo))
        try:
            ok = eval_delta0(matrix, scope)
        except LiftingError:
            # an ill-typed candidate is simply not a witness
            ok = False
        if ok:
            witnesses = {(): dict(zip(quantified, combo))}
            return SigmaResult("true", witnesses, substitute(matrix, {v: Lit(w) for v, w in zip(quantified, combo)}), trials)
    return SigmaResult("unknown", {}, None, trials)


def sigma_semidecide(
    scheme: SigmaScheme,
    selector: str,
    args: Sequence[HFSet],
    budget: Optional[SearchBudget] = None,
    window: int = 2,
) -> SigmaResult:
    """Semidecide ``selector`` at ``args`` through the vector enumeration.

    Every argument must be the code ``encode(l)`` of some vector ``l``
    (otherwise the answer is ``unknown``), and for relations other than Ψ₀
    itself each argument must first satisfy Ψ₀. A prenex ``exists y. φ``
    with Δ₀ ``φ`` is searched over witnesses ``encode(j)``, ``j`` ranging
    over vectors on ``[0, window)`` with entries from the atom pool, after
    any hinted witnesses; any other Σ shape goes to :func:`eval_sigma`.
    ``true`` always comes with a Δ₀-verified instance.
    """
    budget = budget or SearchBudget()
    if len(args) != _selector_arity(scheme, selector):
        raise ValueError(f"{selector} takes {_selector_arity(scheme, selector)} arguments")
    if any(decode(a) is None for a in args):
        return SigmaResult("unknown", {}, None, 0)
    if selector not in ("psi0", "psi0*"):
        for a in args:
            if not sigma_semidecide(scheme, "psi0", (a,), budget, window):
                return SigmaResult("unknown", {}, None, 0)
    hints = _merge(budget.hints, scheme.hints(selector, args))
    return _unfold(scheme.formula(selector), scheme.env(args), hints, budget, window)


# ------------------------------------------------------ M'


@dataclass(frozen=True)
class MPrimeElement:
    carrier: tuple
    witness: RInfinity = field(compare=False)

    def __eq__(self, other) -> bool:
        # the witness coordinate is ignored
        return isinstance(other, MPrimeElement) and self.carrier == other.carrier

    def __hash__(self) -> int:
        return hash(self.carrier)


@dataclass
class MPrime:
    """Witness-paired elements with relations read off the carrier by Δ₀
    matrices; nothing here searches."""

    elements: list
    matrices: dict  # name -> Δ₀ formula in x1..xk

    def holds(self, name: str, elems: Sequence[MPrimeElement]) -> bool:
        env = {}
        for i, el in enumerate(elems, start=1):
            if len(el.carrier) != 1:
                raise ValueError("relations are read on the first coordinate of one-coordinate carriers")
            env[_VAR(i)] = el.carrier[0]
        return eval_delta0(self.matrices[name], env)

    def carriers(self) -> list:
        return list(dict.fromkeys(el.carrier for el in self.elements))


def build_m_prime(
    scheme: Optional[SigmaScheme],
    psi0_matrix: Formula,
    bound: Optional[SearchBudget] = None,
    window: int = 2,
    predicate_matrices: Optional[Mapping[str, Formula]] = None,
    dimension: int = 1,
) -> MPrime:
    """Pairs ``(xs, t)`` with ``psi0_matrix(xs, encode(t))`` true.

    Carriers are codes ``encode(l)`` and witnesses vectors ``t``, both from
    the enumeration on ``[0, window)`` over the atom pool; ``w`` names the
    witness code in the matrix. At most ``bound.max_witnesses`` pairs are
    checked.
    """
    bound = bound or SearchBudget()
    if not is_delta0(psi0_matrix):
        raise FormulaError("the universe matrix must be Δ₀")
    matrices = dict(predicate_matrices or {})
    if scheme is not None:
        for name in matrices:
            if name not in scheme.signature:
                raise KeyError(f"relation {name!r} is not in the scheme's signature")
    for name, f in matrices.items():
        if not is_delta0(f):
            raise FormulaError(f"relation {name!r}: matrix must be Δ₀")
    vectors = vector_candidates(bound.atom_pool, window)
    codes = [encode(v) for v in vectors]
    elements, checked = [], 0
    for carrier in itertools.product(codes, repeat=dimension):
        env = {_VAR(i): c for i, c in enumerate(carrier, start=1)}
        for t, code in zip(vectors, codes):
            if checked >= bound.max_witnesses:
                return MPrime(elements, matrices)
            checked += 1
            env["w"] = code
            try:
                ok = eval_delta0(psi0_matrix, env)
            except LiftingError:
                ok = False
            if ok:
                elements.append(MPrimeElement(tuple(carrier), t))
    return MPrime(elements, matrices)


# ------------------------------------------------------ text form

_ROLE = {"psi0": "psi0", "psi0*": "psi0*", "psi1": "psi1", "psi1*": "psi1*"}


def format_presentation(scheme: SigmaScheme) -> str:
    """``;; role`` header lines, each followed by the formula text."""
    chunks = []
    for sel in scheme.selectors():
        kind, _, name = sel.partition(":")
        head = f";; {kind} {name}/{scheme.signature[name]}" if name else f";; {kind}"
        chunks.append(head + "\n" + format_formula(scheme.formula(sel), indent=2) + "\n")
    return "".join(chunks)


def format_function(d: SigmaFunctionDef) -> str:
    out = f";; graph {d.name}/{d.arity}\n" + format_formula(d.graph, indent=2) + "\n"
    if d.cograph is not None:
        out += f";; cograph {d.name}/{d.arity}\n" + format_formula(d.cograph, indent=2) + "\n"
    return out


def parse_presentation(text: str) -> SigmaScheme:
    parts: dict = {}
    signature: dict = {}
    role, body = None, []

    def flush():
        if role is not None:
            parts[role] = parse_formula("\n".join(body))

    for line in text.splitlines():
        if line.startswith(";; "):
            flush()
            fields = line[3:].split()
            if not fields:
                raise FormulaError("empty role header")
            kind = fields[0]
            if kind in _ROLE:
                role = kind
            elif kind in ("phi", "phi*") and len(fields) == 2 and "/" in fields[1]:
                name, _, arity = fields[1].rpartition("/")
                signature[name] = int(arity)
                role = f"{kind}:{name}"
            else:
                raise FormulaError(f"unknown role header {line!r}")
            body = []
        else:
            body.append(line)
    flush()
    missing = [r for r in _ROLE if r not in parts]
    missing += [f"{k}:{n}" for n in signature for k in ("phi", "phi*") if f"{k}:{n}" not in parts]
    if missing:
        raise FormulaError(f"presentation lacks {', '.join(missing)}")
    phi = {n: (parts[f"phi:{n}"], parts[f"phi*:{n}"]) for n in signature}
    return SigmaScheme(parts["psi0"], parts["psi0*"], parts["psi1"], parts["psi1*"], phi, signature)
