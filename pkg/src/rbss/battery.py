"""Existential sampling check: does a machine's rational substructure keep
the existential facts true over the reals?

For a machine ``M`` and rational parameters, ``f`` is the first output of
``M`` as a function of its first input (remaining inputs fixed). Each
battery formula is ``exists y. P(y, f(y), a, b)``. Its real truth is decided
exactly from the machine's symbolic paths with sympy; a rational witness is
then looked for by running the machine on rational points. Both sides use
the same step bound, so they talk about the same partial function.

This samples the downward preservation of existential formulas; it proves
nothing beyond the sampled cases.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import sympy as sp

from .machine import Machine, Output, run
from .paths import Condition, enumerate_paths
from .poly import Poly, RationalFn

__all__ = ["BatteryFormula", "BATTERY", "BatteryOutcome", "path_pieces", "real_truth", "rational_witness", "check_battery"]

Y = sp.Symbol("y", real=True)


class _Undefined(Exception):
    """f is undefined at a constant the formula mentions."""


def _eq(u, v):
    return sp.Eq(u, v) if isinstance(u, sp.Basic) or isinstance(v, sp.Basic) else u == v


def _ne(u, v):
    return sp.Ne(u, v) if isinstance(u, sp.Basic) or isinstance(v, sp.Basic) else u != v


@dataclass(frozen=True)
class BatteryFormula:
    """``body(y, fy, a, b, fc)``; ``fc(q)`` is ``f`` at a constant."""

    name: str
    text: str
    body: Callable


BATTERY: tuple[BatteryFormula, ...] = (
    BatteryFormula("above", "f(y) > a", lambda y, fy, a, b, fc: fy > a),
    BatteryFormula("below", "f(y) < a", lambda y, fy, a, b, fc: fy < a),
    BatteryFormula("at-least", "f(y) >= a", lambda y, fy, a, b, fc: fy >= a),
    BatteryFormula("at-most", "f(y) <= a", lambda y, fy, a, b, fc: fy <= a),
    BatteryFormula("rise", "a < y < b and f(y) > f(a)", lambda y, fy, a, b, fc: (a < y) & (y < b) & (fy > fc(a))),
    BatteryFormula("dip", "a < y < b and f(y) < f(b)", lambda y, fy, a, b, fc: (a < y) & (y < b) & (fy < fc(b))),
    BatteryFormula("miss", "f(y) != a", lambda y, fy, a, b, fc: _ne(fy, a)),
    BatteryFormula("fiber", "f(y) = f(a) and y != a", lambda y, fy, a, b, fc: _eq(fy, fc(a)) & _ne(y, a)),
    BatteryFormula("sandwich", "f(a) < f(y) < f(b)", lambda y, fy, a, b, fc: (fc(a) < fy) & (fy < fc(b))),
    BatteryFormula("right-high", "y > a and f(y) > b", lambda y, fy, a, b, fc: (y > a) & (fy > b)),
    BatteryFormula("left-low", "y < a and f(y) < b", lambda y, fy, a, b, fc: (y < a) & (fy < b)),
    BatteryFormula("sum-fiber", "f(y) = f(a + b)", lambda y, fy, a, b, fc: _eq(fy, fc(a + b))),
    BatteryFormula("product-fiber", "f(y) = f(a * b)", lambda y, fy, a, b, fc: _eq(fy, fc(a * b))),
    BatteryFormula("nonneg-left", "f(y) >= 0 and y < a", lambda y, fy, a, b, fc: (fy >= 0) & (y < a)),
    BatteryFormula("neg-right", "f(y) < 0 and y > a", lambda y, fy, a, b, fc: (fy < 0) & (y > a)),
    BatteryFormula("lift", "f(y) - y > a", lambda y, fy, a, b, fc: fy - y > a),
    BatteryFormula("sink", "f(y) + y < a", lambda y, fy, a, b, fc: fy + y < a),
    BatteryFormula("square-below", "y * y < a", lambda y, fy, a, b, fc: y * y < a),
    BatteryFormula("root", "f(y) = 0", lambda y, fy, a, b, fc: _eq(fy, 0)),
    BatteryFormula("scaled", "f(y) * y > a", lambda y, fy, a, b, fc: fy * y > a),
)


def _to_sympy(p: Poly, fixed: Sequence[Fraction]) -> sp.Expr:
    out = sp.Integer(0)
    for mono, coef in p.terms.items():
        term = sp.Rational(coef.numerator, coef.denominator)
        for var, exp in mono:
            base = Y if var == 1 else sp.Rational(fixed[var - 2].numerator, fixed[var - 2].denominator)
            term *= base**exp
        out += term
    return out


def _condition_set(c: Condition, fixed) -> sp.Set:
    num, den = _to_sympy(c.num, fixed), _to_sympy(c.den, fixed)
    nonpole = sp.Ne(den, 0).as_set() if den.free_symbols else (sp.S.Reals if den != 0 else sp.S.EmptySet)
    if c.kind == "ne0":
        rel = sp.Ne(num, 0)
    elif c.kind == "ge0":
        rel = num * den >= 0
    else:
        rel = num * den < 0
    return sp.Intersection(_relation_set(rel), nonpole)


def _relation_set(rel) -> sp.Set:
    if rel is sp.true or rel is True:
        return sp.S.Reals
    if rel is sp.false or rel is False:
        return sp.S.EmptySet
    return rel.as_set()


def _fc_real(m: Machine, fixed, fuel: int):
    def fc(q):
        v = _value(m, Fraction(q.p, q.q) if isinstance(q, sp.Rational) else Fraction(q), fixed, fuel)
        if v is None:
            raise _Undefined
        return sp.Rational(v.numerator, v.denominator)

    return fc


def _approx(x) -> Fraction:
    return Fraction(str(sp.N(x, 30))).limit_denominator(10**6)


def _rational_points(s: sp.Set) -> list[Fraction]:
    """A few rational members of ``s`` read off its structure."""
    out = []
    if isinstance(s, sp.FiniteSet):
        out += [Fraction(int(e.p), int(e.q)) for e in s if e.is_Rational]
    elif isinstance(s, sp.Interval):
        lo, hi = s.start, s.end
        for end, closed in ((lo, not s.left_open), (hi, not s.right_open)):
            if closed and end.is_Rational:
                out.append(Fraction(int(end.p), int(end.q)))
        if lo.is_finite and hi.is_finite:
            mid = _approx((lo + hi) / 2)
        elif lo.is_finite:
            mid = _approx(lo) + 1
        elif hi.is_finite:
            mid = _approx(hi) - 1
        else:
            mid = Fraction(0)
        out.append(mid)
    elif isinstance(s, sp.Union):
        for part in s.args:
            out += _rational_points(part)
    return out


def path_pieces(m: Machine, depth: int = 24, fixed: Sequence = ()) -> list[tuple[sp.Set, sp.Expr]]:
    """``(region, f on the region)`` for every output path within ``depth``."""
    fixed = [Fraction(q) for q in fixed]
    pieces = []
    for p in enumerate_paths(m, m.arity, depth):
        if not p.outputs:
            continue
        region = sp.S.Reals
        for c in p.conditions:
            region = sp.Intersection(region, _condition_set(c, fixed))
        if region.is_empty:
            continue
        out: RationalFn = p.outputs[0]
        pieces.append((region, _to_sympy(out.num, fixed) / _to_sympy(out.den, fixed)))
    return pieces


def _rational(q) -> sp.Rational:
    q = Fraction(q)
    return sp.Rational(q.numerator, q.denominator)


def real_truth(
    m: Machine, formula: BatteryFormula, a, b, depth: int = 24, fixed: Sequence = (), pieces=None
) -> tuple[bool, list]:
    """Exact truth over the reals, plus rational points of the solution set."""
    fixed = [Fraction(q) for q in fixed]
    if pieces is None:
        pieces = path_pieces(m, depth, fixed)
    fc = _fc_real(m, fixed, depth)
    true, points = False, []
    for region, fy in pieces:
        try:
            rel = formula.body(Y, fy, _rational(a), _rational(b), fc)
        except _Undefined:
            return False, []
        sol = sp.Intersection(region, _relation_set(rel))
        empty = sol.is_empty
        if empty is None:
            raise RuntimeError(f"{m.name}/{formula.name}: cannot decide emptiness of {sol}")
        if not empty:
            true = True
            points += _rational_points(sol)
    return true, points


_RUNS: dict = {}


def _value(m: Machine, y: Fraction, fixed, fuel: int) -> Optional[Fraction]:
    # the machine is stored with its table so its id stays valid
    _, table = _RUNS.setdefault(id(m), (m, {}))
    key = (y, tuple(fixed), fuel)
    if key not in table:
        res = run(m, (y, *fixed), fuel)
        table[key] = res.values[0] if isinstance(res, Output) and res.values else None
    return table[key]


def _grid(radius: int = 6, max_den: int = 6) -> list[Fraction]:
    pts = {Fraction(n, d) for d in range(1, max_den + 1) for n in range(-radius * d, radius * d + 1)}
    return sorted(pts, key=lambda q: (q.denominator, abs(q), q < 0))


def rational_witness(
    m: Machine, formula: BatteryFormula, a, b, fuel: int = 24, fixed: Sequence = (), extra: Iterable = ()
) -> Optional[Fraction]:
    """A rational ``y`` making the formula true, checked by running ``m``."""
    fixed = [Fraction(q) for q in fixed]
    a, b = Fraction(a), Fraction(b)

    def fc(q):
        v = _value(m, Fraction(q), fixed, fuel)
        if v is None:
            raise _Undefined
        return v

    for y in list(extra) + _grid():
        fy = _value(m, y, fixed, fuel)
        if fy is None:
            continue
        try:
            if formula.body(y, fy, a, b, fc):
                return y
        except _Undefined:
            return None
    return None


@dataclass(frozen=True)
class BatteryOutcome:
    machine: str
    formula: str
    a: Fraction
    b: Fraction
    real: bool
    witness: Optional[Fraction]

    @property
    def preserved(self) -> bool:
        return not self.real or self.witness is not None


DEFAULT_PARAMS = ((Fraction(1, 2), Fraction(2)), (Fraction(-1), Fraction(3, 2)), (Fraction(3), Fraction(5, 4)))
DEFAULT_FIXED = (Fraction(1, 3), Fraction(2))


def check_battery(
    machines: Iterable[Machine], params=DEFAULT_PARAMS, depth: int = 24, fixed: Sequence = DEFAULT_FIXED
) -> list[BatteryOutcome]:
    out = []
    for m in machines:
        rest = list(fixed[: m.arity - 1])
        pieces = path_pieces(m, depth, rest)
        for formula in BATTERY:
            for a, b in params:
                real, points = real_truth(m, formula, a, b, depth, rest, pieces)
                witness = rational_witness(m, formula, a, b, depth, rest, points) if real else None
                out.append(BatteryOutcome(m.name, formula.name, Fraction(a), Fraction(b), real, witness))
    return out
