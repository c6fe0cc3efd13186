"""Δ₀ and Σ formulas over hereditarily finite sets with rational atoms.

Base predicates are the graphs of the ordered-field operations, lifted to
sets: every argument must evaluate to a singleton ``{a}`` of an atom, and
the predicate is then checked on the atoms exactly.

Σ truth is only semidecided. :func:`eval_sigma` searches witnesses for the
unbounded existentials and, on success, returns a Δ₀ *instance*: the same
formula with every unbounded ``exists y`` replaced by ``exists y in W``,
``W`` being the finite set of witnesses the search actually used there.
The instance is re-checked with :func:`eval_delta0` before True is reported.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, Optional, Sequence, Union

from .hf import EMPTY, Atom, HFParseError, HFSet, HSet, format_hf, parse_hf, single
from .scalar import format_rational, parse_rational

__all__ = [
    "Var",
    "Lit",
    "Single",
    "Member",
    "Equal",
    "Base",
    "And",
    "Or",
    "Not",
    "BoundedExists",
    "BoundedForall",
    "Exists",
    "TRUE",
    "FALSE",
    "LiftingError",
    "FormulaError",
    "SearchBudget",
    "SigmaResult",
    "is_delta0",
    "is_sigma",
    "free_vars",
    "substitute",
    "freshen",
    "prefix_bound",
    "eval_term",
    "eval_delta0",
    "eval_sigma",
    "enumerate_hf",
    "parse_formula",
    "format_formula",
    "format_term",
    "BASE_ARITY",
]


# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lit:
    value: HFSet


@dataclass(frozen=True)
class Single:
    """The singleton ``{t}``; how scalars reach base predicates."""

    term: "Term"


Term = Union[Var, Lit, Single]


# ------------------------------------------------------------- formulas


@dataclass(frozen=True)
class Member:
    elem: Term
    container: Term


@dataclass(frozen=True)
class Equal:
    left: Term
    right: Term


BASE_ARITY = {"less": 2, "add": 3, "mul": 3, "iszero": 1, "isone": 1}


@dataclass(frozen=True)
class Base:
    name: str
    args: tuple

    def __post_init__(self):
        if BASE_ARITY.get(self.name) != len(self.args):
            raise FormulaError(f"base predicate {self.name!r} takes {BASE_ARITY.get(self.name)} arguments")


@dataclass(frozen=True)
class And:
    parts: tuple


@dataclass(frozen=True)
class Or:
    parts: tuple


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class BoundedExists:
    var: str
    bound: Term
    body: "Formula"


@dataclass(frozen=True)
class BoundedForall:
    var: str
    bound: Term
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


Formula = Union[Member, Equal, Base, And, Or, Not, BoundedExists, BoundedForall, Exists]

TRUE = And(())
FALSE = Or(())


class LiftingError(TypeError):
    """A base predicate received something other than ``{atom}``."""


class FormulaError(ValueError):
    pass


# ------------------------------------------------------- classification


def is_delta0(f: Formula) -> bool:
    if isinstance(f, Exists):
        return False
    if isinstance(f, (And, Or)):
        return all(is_delta0(p) for p in f.parts)
    if isinstance(f, Not):
        return is_delta0(f.body)
    if isinstance(f, (BoundedExists, BoundedForall)):
        return is_delta0(f.body)
    return True


def is_sigma(f: Formula) -> bool:
    if isinstance(f, Not):
        return is_delta0(f.body)
    if isinstance(f, (And, Or)):
        return all(is_sigma(p) for p in f.parts)
    if isinstance(f, (BoundedExists, BoundedForall, Exists)):
        return is_sigma(f.body)
    return True


def _term_vars(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Single):
        return _term_vars(t.term)
    return set()


def free_vars(f: Formula) -> set[str]:
    if isinstance(f, Member):
        return _term_vars(f.elem) | _term_vars(f.container)
    if isinstance(f, Equal):
        return _term_vars(f.left) | _term_vars(f.right)
    if isinstance(f, Base):
        return set().union(*(_term_vars(a) for a in f.args))
    if isinstance(f, (And, Or)):
        return set().union(*(free_vars(p) for p in f.parts))
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, (BoundedExists, BoundedForall)):
        return _term_vars(f.bound) | (free_vars(f.body) - {f.var})
    return free_vars(f.body) - {f.var}


def _subst_term(t: Term, mapping: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return mapping.get(t.name, t)
    if isinstance(t, Single):
        return Single(_subst_term(t.term, mapping))
    return t


def substitute(f: Formula, mapping: Mapping[str, Term]) -> Formula:
    """Replace free variables by terms. Callers keep bound names disjoint
    from the terms' variables (see :func:`freshen`)."""
    if not mapping:
        return f
    st = lambda t: _subst_term(t, mapping)  # noqa: E731
    if isinstance(f, Member):
        return Member(st(f.elem), st(f.container))
    if isinstance(f, Equal):
        return Equal(st(f.left), st(f.right))
    if isinstance(f, Base):
        return Base(f.name, tuple(st(a) for a in f.args))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(substitute(p, mapping) for p in f.parts))
    if isinstance(f, Not):
        return Not(substitute(f.body, mapping))
    inner = {k: v for k, v in mapping.items() if k != f.var}
    if isinstance(f, (BoundedExists, BoundedForall)):
        return type(f)(f.var, st(f.bound), substitute(f.body, inner))
    return Exists(f.var, substitute(f.body, inner))


def freshen(f: Formula, prefix: str, counter: Optional[itertools.count] = None) -> Formula:
    """Rename every bound variable to ``prefix<k>``; free ones are untouched."""
    counter = counter or itertools.count()

    def go(g: Formula, ren: dict) -> Formula:
        st = lambda t: _subst_term(t, ren)  # noqa: E731
        if isinstance(g, Member):
            return Member(st(g.elem), st(g.container))
        if isinstance(g, Equal):
            return Equal(st(g.left), st(g.right))
        if isinstance(g, Base):
            return Base(g.name, tuple(st(a) for a in g.args))
        if isinstance(g, (And, Or)):
            return type(g)(tuple(go(p, ren) for p in g.parts))
        if isinstance(g, Not):
            return Not(go(g.body, ren))
        new = f"{prefix}{next(counter)}"
        inner = {**ren, g.var: Var(new)}
        if isinstance(g, (BoundedExists, BoundedForall)):
            return type(g)(new, st(g.bound), go(g.body, inner))
        return Exists(new, go(g.body, inner))

    return go(f, {})


def prefix_bound(f: Formula, prefix: str) -> Formula:
    """Rename every bound variable ``v`` to ``prefix + v``.

    Deterministic, so witness hints keyed by variable name can be renamed
    alongside the formula.
    """

    def go(g: Formula, ren: dict) -> Formula:
        st = lambda t: _subst_term(t, ren)  # noqa: E731
        if isinstance(g, Member):
            return Member(st(g.elem), st(g.container))
        if isinstance(g, Equal):
            return Equal(st(g.left), st(g.right))
        if isinstance(g, Base):
            return Base(g.name, tuple(st(a) for a in g.args))
        if isinstance(g, (And, Or)):
            return type(g)(tuple(go(p, ren) for p in g.parts))
        if isinstance(g, Not):
            return Not(go(g.body, ren))
        new = prefix + g.var
        inner = {**ren, g.var: Var(new)}
        if isinstance(g, (BoundedExists, BoundedForall)):
            return type(g)(new, st(g.bound), go(g.body, inner))
        return Exists(new, go(g.body, inner))

    return go(f, {})


# ------------------------------------------------------------ semantics


def eval_term(t: Term, env: Mapping[str, HFSet]) -> HFSet:
    if isinstance(t, Var):
        try:
            return env[t.name]
        except KeyError:
            raise FormulaError(f"unbound variable {t.name!r}") from None
    if isinstance(t, Lit):
        return t.value
    return single(eval_term(t.term, env))


def _scalar(value: HFSet, pred: str) -> Fraction:
    if value.is_atom or len(value) != 1 or not value.elements[0].is_atom:
        raise LiftingError(f"{pred}: argument {format_hf(value)} is not a singleton of an atom")
    return value.elements[0].value


def _base(name: str, xs: list[Fraction]) -> bool:
    if name == "less":
        return xs[0] < xs[1]
    if name == "add":
        return xs[0] + xs[1] == xs[2]
    if name == "mul":
        return xs[0] * xs[1] == xs[2]
    if name == "iszero":
        return xs[0] == 0
    return xs[0] == 1


def _elements(value: HFSet) -> tuple:
    # atoms are urelements: nothing is a member of them
    return () if value.is_atom else value.elements


def eval_delta0(f: Formula, env: Mapping[str, HFSet]) -> bool:
    """Decide a Δ₀ formula. Raises :class:`LiftingError` on ill-typed base
    predicate arguments and :class:`FormulaError` on unbounded quantifiers."""
    if isinstance(f, Member):
        container = eval_term(f.container, env)
        return not container.is_atom and eval_term(f.elem, env) in container
    if isinstance(f, Equal):
        return eval_term(f.left, env) == eval_term(f.right, env)
    if isinstance(f, Base):
        return _base(f.name, [_scalar(eval_term(a, env), f.name) for a in f.args])
    if isinstance(f, And):
        return all(eval_delta0(p, env) for p in f.parts)
    if isinstance(f, Or):
        return any(eval_delta0(p, env) for p in f.parts)
    if isinstance(f, Not):
        return not eval_delta0(f.body, env)
    if isinstance(f, BoundedExists):
        scope = dict(env)
        for e in _elements(eval_term(f.bound, env)):
            scope[f.var] = e
            if eval_delta0(f.body, scope):
                return True
        return False
    if isinstance(f, BoundedForall):
        scope = dict(env)
        for e in _elements(eval_term(f.bound, env)):
            scope[f.var] = e
            if not eval_delta0(f.body, scope):
                return False
        return True
    raise FormulaError("unbounded exists in a Δ₀ evaluation")


# --------------------------------------------------------------- search


@dataclass
class SearchBudget:
    """Limits of a witness search.

    ``hints`` maps a variable name to candidates tried before the generic
    enumeration (used to feed known traces to the search).
    """

    max_witnesses: int = 2000
    atom_pool: Sequence = (0, 1, -1, 2)
    max_rank: int = 2
    hints: Mapping[str, Sequence[HFSet]] = field(default_factory=dict)

    def __post_init__(self):
        if self.max_witnesses < 0 or self.max_rank < 0:
            raise ValueError("search bounds must be non-negative")
        self.atom_pool = tuple(sorted({Fraction(a) for a in self.atom_pool}))


@dataclass
class SigmaResult:
    status: str  # "true" or "unknown"
    witnesses: dict  # occurrence path -> (variable, tuple of HF values)
    instance: Optional[Formula]
    trials: int

    def __bool__(self) -> bool:
        return self.status == "true"


def enumerate_hf(pool: Sequence, max_rank: int) -> Iterator[HFSet]:
    """HF values over ``pool`` of rank at most ``max_rank``, by rank and
    then size; every value appears exactly once."""
    atoms = [Atom(a) for a in sorted({Fraction(a) for a in pool})]
    yield from atoms
    lower: list[HFSet] = list(atoms)
    top: list[HFSet] = list(atoms)  # values of the previous rank
    for rank in range(1, max_rank + 1):
        fresh: list[HFSet] = []
        if rank == 1:
            fresh.append(EMPTY)
            yield EMPTY
        top_set = set(top)
        for size in range(1, len(lower) + 1):
            for combo in itertools.combinations(lower, size):
                if any(c in top_set for c in combo):
                    s = HSet(combo)
                    fresh.append(s)
                    yield s
        lower.extend(fresh)
        top = fresh


class _Exhausted(Exception):
    pass


class _Search:
    def __init__(self, budget: SearchBudget) -> None:
        self.budget = budget
        self.trials = 0
        self.limit = 1
        self.truncated = False
        self.witnesses: dict = {}
        self._generic: list[HFSet] = []
        self._source = enumerate_hf(budget.atom_pool, budget.max_rank)
        self._source_done = False
        self._delta0: dict = {}

    def delta0(self, f: Formula) -> bool:
        key = id(f)
        if key not in self._delta0:
            self._delta0[key] = (is_delta0(f), f)
        return self._delta0[key][0]

    def candidates(self, var: str) -> Iterator[HFSet]:
        hints = list(self.budget.hints.get(var, ()))
        seen = set(hints)
        produced = 0
        for h in hints:
            if produced == self.limit:
                self.truncated = True
                return
            produced += 1
            yield h
        i = 0
        while True:
            while i >= len(self._generic):
                if self._source_done:
                    return
                try:
                    self._generic.append(next(self._source))
                except StopIteration:
                    self._source_done = True
                    return
            cand = self._generic[i]
            i += 1
            if cand in seen:
                continue
            if produced == self.limit:
                self.truncated = True
                return
            produced += 1
            yield cand

    def run(self, f: Formula, env: dict, path: tuple, guarded: bool) -> bool:
        if self.delta0(f):
            if not guarded:
                return eval_delta0(f, env)
            try:
                return eval_delta0(f, env)
            except LiftingError:
                return False
        if isinstance(f, And):
            return all(self.run(p, env, path + (k,), guarded) for k, p in enumerate(f.parts))
        if isinstance(f, Or):
            return any(self.run(p, env, path + (k,), guarded) for k, p in enumerate(f.parts))
        if isinstance(f, (BoundedExists, BoundedForall)):
            try:
                elems = _elements(eval_term(f.bound, env))
            except LiftingError:
                return False
            scope = dict(env)
            for e in elems:
                scope[f.var] = e
                ok = self.run(f.body, scope, path + (0,), guarded)
                if isinstance(f, BoundedExists) and ok:
                    return True
                if isinstance(f, BoundedForall) and not ok:
                    return False
            return isinstance(f, BoundedForall)
        if isinstance(f, Exists):
            scope = dict(env)
            for cand in self.candidates(f.var):
                self.trials += 1
                if self.trials > self.budget.max_witnesses:
                    raise _Exhausted
                scope[f.var] = cand
                if self.run(f.body, scope, path + (0,), True):
                    self.witnesses.setdefault(path, (f.var, set()))[1].add(cand)
                    return True
            return False
        raise FormulaError(f"not a Σ formula: {type(f).__name__}")


def _instance(f: Formula, witnesses: dict, path: tuple = ()) -> Formula:
    if isinstance(f, Exists):
        used = witnesses.get(path, (f.var, set()))[1]
        return BoundedExists(f.var, Lit(HSet(used)), _instance(f.body, witnesses, path + (0,)))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(_instance(p, witnesses, path + (k,)) for k, p in enumerate(f.parts)))
    if isinstance(f, (BoundedExists, BoundedForall)) and not is_delta0(f):
        return type(f)(f.var, f.bound, _instance(f.body, witnesses, path + (0,)))
    return f


def eval_sigma(f: Formula, env: Mapping[str, HFSet], budget: Optional[SearchBudget] = None) -> SigmaResult:
    """Semidecide a Σ formula: ``true`` with a verified instance, or ``unknown``.

    Existentials are explored by iterative deepening: every unbounded
    quantifier looks at its first ``L`` candidates, and ``L`` doubles until
    the budget runs out or no quantifier was cut short.
    """
    budget = budget or SearchBudget()
    if not is_sigma(f):
        raise FormulaError("formula is not Σ")
    env = dict(env)
    search = _Search(budget)
    found = False
    try:
        while True:
            search.truncated = False
            if search.run(f, env, (), False):
                found = True
                break
            if not search.truncated:
                break
            search.limit *= 2
    except _Exhausted:
        pass
    if not found:
        return SigmaResult("unknown", {}, None, min(search.trials, budget.max_witnesses))
    inst = _instance(f, search.witnesses)
    if not eval_delta0(inst, env):  # pragma: no cover - would be a search bug
        raise AssertionError("witness instance failed Δ₀ verification")
    witnesses = {p: (v, tuple(sorted(ws, key=lambda h: h.sort_key()))) for p, (v, ws) in search.witnesses.items()}
    return SigmaResult("true", witnesses, inst, search.trials)


# ---------------------------------------------------------- text format

_SEXP_TOKEN = re.compile(
    r"\s*(?:(;[^\n]*)|(\(\{)|(\}\))|(\()|(\))|(atom\([^)]*\))|([A-Za-z_][A-Za-z0-9_'.\-]*|=)|([-+]?[0-9][0-9./]*)|(\{))"
)


def _tokenize(text: str) -> list:
    tokens = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            return tokens
        m = _SEXP_TOKEN.match(text, pos)
        if not m:
            raise FormulaError(f"unexpected character {text[pos]!r} at offset {pos}")
        if m.group(1):
            pos = m.end()
            continue
        if m.group(2):
            tokens.append(("sopen", None))
        elif m.group(3):
            tokens.append(("sclose", None))
        elif m.group(4):
            tokens.append(("(", None))
        elif m.group(5):
            tokens.append((")", None))
        elif m.group(6):
            tokens.append(("lit", _hf(m.group(6))))
        elif m.group(7):
            tokens.append(("name", m.group(7)))
        elif m.group(8):
            tokens.append(("num", m.group(8)))
        else:
            start = m.start(9)
            depth, i = 0, start
            while i < n:
                if text[i] == "{":
                    depth += 1
                elif text[i] == "}":
                    depth -= 1
                    if depth == 0:
                        break
                i += 1
            if depth:
                raise FormulaError("unbalanced braces in set literal")
            tokens.append(("lit", _hf(text[start:i + 1])))
            pos = i + 1
            continue
        pos = m.end()


def _hf(text: str) -> HFSet:
    try:
        return parse_hf(text)
    except HFParseError as exc:
        raise FormulaError(f"bad HF literal {text!r}: {exc}") from None


_QUANT = {"exists-in": BoundedExists, "forall-in": BoundedForall}


def parse_formula(text: str) -> Formula:
    tokens = _tokenize(text)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else (None, None)

    def take(kind=None):
        nonlocal pos
        tok = peek()
        if tok[0] is None:
            raise FormulaError("unexpected end of formula")
        if kind and tok[0] != kind:
            raise FormulaError(f"expected {kind!r}, got {tok[1] or tok[0]!r}")
        pos += 1
        return tok

    def term() -> Term:
        kind, val = take()
        if kind == "name":
            return Var(val)
        if kind == "lit":
            return Lit(val)
        if kind == "num":
            try:
                return Lit(Atom(parse_rational(val)))
            except ValueError as exc:
                raise FormulaError(str(exc)) from None
        if kind == "sopen":
            inner = term()
            take("sclose")
            return Single(inner)
        raise FormulaError(f"expected a term, got {val or kind!r}")

    def formula() -> Formula:
        take("(")
        kind, head = take("name")
        if head in ("and", "or"):
            parts = []
            while peek()[0] != ")":
                parts.append(formula())
            take(")")
            return (And if head == "and" else Or)(tuple(parts))
        if head == "not":
            body = formula()
            take(")")
            return Not(body)
        if head in _QUANT:
            var = take("name")[1]
            bound = term()
            body = formula()
            take(")")
            return _QUANT[head](var, bound, body)
        if head == "exists":
            var = take("name")[1]
            body = formula()
            take(")")
            return Exists(var, body)
        if head in ("in", "="):
            a, b = term(), term()
            take(")")
            return Member(a, b) if head == "in" else Equal(a, b)
        if head in BASE_ARITY:
            args = []
            while peek()[0] != ")":
                args.append(term())
            take(")")
            return Base(head, tuple(args))
        raise FormulaError(f"unknown connective {head!r}")

    f = formula()
    if pos != len(tokens):
        raise FormulaError("trailing input after formula")
    return f


def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Lit):
        return format_hf(t.value)
    inner = t.term
    if isinstance(inner, Lit) and inner.value.is_atom:
        return "({" + format_rational(inner.value.value) + "})"
    return "({" + format_term(inner) + "})"


def format_formula(f: Formula, indent: Optional[int] = None, _level: int = 0) -> str:
    """S-expression text; with ``indent`` compound formulas span lines."""
    def head_and_args(g):
        if isinstance(g, Member):
            return "in", [format_term(g.elem), format_term(g.container)], []
        if isinstance(g, Equal):
            return "=", [format_term(g.left), format_term(g.right)], []
        if isinstance(g, Base):
            return g.name, [format_term(a) for a in g.args], []
        if isinstance(g, (And, Or)):
            return ("and" if isinstance(g, And) else "or"), [], list(g.parts)
        if isinstance(g, Not):
            return "not", [], [g.body]
        if isinstance(g, BoundedExists):
            return "exists-in", [g.var, format_term(g.bound)], [g.body]
        if isinstance(g, BoundedForall):
            return "forall-in", [g.var, format_term(g.bound)], [g.body]
        return "exists", [g.var], [g.body]

    head, atoms, subs = head_and_args(f)
    first = " ".join([head] + atoms)
    if indent is None or not subs:
        rest = "".join(" " + format_formula(s) for s in subs)
        return f"({first}{rest})"
    pad = " " * (indent * (_level + 1))
    rest = "".join("\n" + pad + format_formula(s, indent, _level + 1) for s in subs)
    return f"({first}{rest})"

