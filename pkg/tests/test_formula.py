import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import FORMULAS
from rbss.formula import (
    And,
    Base,
    BoundedExists,
    BoundedForall,
    Equal,
    Exists,
    FormulaError,
    LiftingError,
    Lit,
    Member,
    Not,
    Or,
    SearchBudget,
    Single,
    Var,
    enumerate_hf,
    eval_delta0,
    eval_sigma,
    format_formula,
    free_vars,
    is_delta0,
    is_sigma,
    parse_formula,
)
from rbss.hf import EMPTY, Atom, HSet, canonicalize, hf_rank, parse_hf, single


def s(x):
    return single(Atom(x))


def test_bounded_exists_over_singleton_empty():
    f = BoundedExists("x", Lit(single(EMPTY)), Equal(Var("x"), Lit(EMPTY)))
    assert eval_delta0(f, {})


def test_base_predicates():
    assert eval_delta0(Base("less", (Lit(s(2)), Lit(s(3)))), {})
    assert not eval_delta0(Base("add", (Lit(s(1)), Lit(s(1)), Lit(s(3)))), {})
    assert eval_delta0(Base("mul", (Lit(s(Fraction(1, 2))), Lit(s(4)), Lit(s(2)))), {})
    assert eval_delta0(Base("iszero", (Lit(s(0)),)), {})
    assert eval_delta0(Base("isone", (Lit(s(1)),)), {})


def test_base_on_bare_atom_is_a_lifting_error():
    with pytest.raises(LiftingError):
        eval_delta0(Base("less", (Lit(Atom(2)), Lit(s(3)))), {})
    with pytest.raises(LiftingError):
        eval_delta0(Base("iszero", (Lit(HSet((Atom(0), Atom(1)))),)), {})


def test_atoms_have_no_members_in_formulas():
    assert not eval_delta0(Member(Lit(EMPTY), Lit(Atom(1))), {})
    assert eval_delta0(BoundedForall("z", Lit(Atom(1)), Equal(Var("z"), Lit(EMPTY))), {})


def test_unbound_variable():
    with pytest.raises(FormulaError):
        eval_delta0(Equal(Var("x"), Lit(EMPTY)), {})


def test_square_root_of_four_found():
    f = parse_formula("(exists y (mul ({y}) ({y}) ({4})))")
    res = eval_sigma(f, {}, SearchBudget(atom_pool=(0, 1, 2)))
    assert res
    assert eval_delta0(res.instance, {})
    (var, ws), = res.witnesses.values()
    assert var == "y" and (Atom(2) in ws or Atom(-2) in ws)


@pytest.mark.parametrize("budget", [10, 200, 5000])
def test_square_root_of_minus_one_unknown(budget):
    f = parse_formula("(exists y (mul ({y}) ({y}) ({-1})))")
    res = eval_sigma(f, {}, SearchBudget(max_witnesses=budget, atom_pool=(0, 1, -1, 2, 3), max_rank=2))
    assert res.status == "unknown"
    assert res.instance is None


def test_degenerate_sigma_agrees_with_delta0():
    f = parse_formula("(and (in {} x) (not (= x {})))")
    for x in ("{{}}", "{{}, atom(1)}", "{atom(1)}", "{}"):
        env = {"x": parse_hf(x)}
        assert bool(eval_sigma(f, env)) == eval_delta0(f, env)


def test_budget_limits_trials():
    f = parse_formula("(exists y (mul ({y}) ({y}) ({-1})))")
    res = eval_sigma(f, {}, SearchBudget(max_witnesses=3, atom_pool=range(-5, 6)))
    assert res.trials <= 3


def test_negative_budget_rejected():
    with pytest.raises(ValueError):
        SearchBudget(max_witnesses=-1)


def test_hints_are_tried_first():
    f = parse_formula("(exists y (mul ({y}) ({y}) ({49})))")
    assert not eval_sigma(f, {}, SearchBudget(atom_pool=(0, 1)))
    assert eval_sigma(f, {}, SearchBudget(atom_pool=(0, 1), hints={"y": [Atom(7)]}))


def test_nested_unbounded_exists():
    f = parse_formula("(exists a (exists b (and (add ({a}) ({b}) ({3})) (mul ({a}) ({b}) ({2})))))")
    res = eval_sigma(f, {}, SearchBudget(atom_pool=(0, 1, 2)))
    assert res and eval_delta0(res.instance, {})


def test_classification():
    d0 = parse_formula("(forall-in z x (in z x))")
    sig = parse_formula("(exists y (in y x))")
    assert is_delta0(d0) and is_sigma(d0)
    assert not is_delta0(sig) and is_sigma(sig)
    assert not is_sigma(Not(sig))
    assert free_vars(sig) == {"x"}
    with pytest.raises(FormulaError):
        eval_sigma(Not(sig), {"x": EMPTY})


def test_enumeration_is_repetition_free():
    values = list(enumerate_hf((0, 1), 2))
    assert len(values) == len(set(values))
    assert all(hf_rank(v) <= 2 for v in values)
    # rank 1 over two atoms: {}, {0}, {1}, {0,1}
    assert sum(1 for v in values if hf_rank(v) == 1) == 4


EXPECTED = {
    "sqrt_four": "true",
    "less": "true",
    "empty_member": "true",
    "extensional": "true",
    "pair_set": "true",
    "sum_product": "true",
    "zero_or_one": "true",
    "sqrt_minus_one": "unknown",
    "add_false": "unknown",
    "no_max": "unknown",
}


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_fixture_formulas(name):
    f = parse_formula((FORMULAS / f"{name}.sexp").read_text())
    env = {"x": HSet((Atom(1), Atom(2)))}
    res = eval_sigma(f, env, SearchBudget(atom_pool=(0, 1, -1, 2, 3)))
    assert res.status == EXPECTED[name]
    if res:
        assert eval_delta0(res.instance, env)


def test_parse_errors():
    for bad in ("(exists y", "(frob x y)", "(in x y) extra", "(= x {atom(1)})}", "(in x"):
        with pytest.raises(FormulaError):
            parse_formula(bad)


def test_sample_text_round_trip():
    text = "(exists y (mul ({y}) ({y}) ({4})))"
    assert format_formula(parse_formula(text)) == text
    for path in sorted(FORMULAS.glob("*.sexp")):
        f = parse_formula(path.read_text())
        assert parse_formula(format_formula(f)) == f
        assert parse_formula(format_formula(f, indent=2)) == f


# ---- generated formulas

atoms = st.sampled_from([0, 1, -1, 2, Fraction(1, 2)]).map(Atom)
hf_values = st.recursive(atoms | st.just(EMPTY), lambda inner: st.lists(inner, max_size=3).map(lambda xs: HSet(xs)), max_leaves=6)
names = st.sampled_from(["x", "y", "z"])
terms = st.one_of(names.map(Var), hf_values.map(Lit), atoms.map(lambda a: Single(Lit(a))), names.map(lambda n: Single(Var(n))))


def _formulas(depth):
    leaf = st.one_of(
        st.builds(Member, terms, terms),
        st.builds(Equal, terms, terms),
        st.builds(lambda a, b: Base("less", (a, b)), terms, terms),
    )
    if depth == 0:
        return leaf
    sub = _formulas(depth - 1)
    return st.one_of(
        leaf,
        st.builds(lambda ps: And(tuple(ps)), st.lists(sub, min_size=1, max_size=3)),
        st.builds(lambda ps: Or(tuple(ps)), st.lists(sub, min_size=1, max_size=3)),
        st.builds(Not, sub),
        st.builds(BoundedExists, names, terms, sub),
        st.builds(BoundedForall, names, terms, sub),
        st.builds(Exists, names, sub),
    )


formulas = _formulas(3)


@given(formulas)
def test_text_round_trip(f):
    text = format_formula(f)
    assert format_formula(parse_formula(text)) == text
    assert parse_formula(text) == f


def _outcome(f, env):
    try:
        return eval_delta0(f, env)
    except LiftingError:
        return "lifting"


def _variant(value, rnd):
    # same set, listed in a shuffled order with repeats
    if value.is_atom:
        return value
    elems = [_variant(e, rnd) for e in value.elements]
    raw = elems + [rnd.choice(elems) for _ in range(rnd.randint(0, 2))] if elems else []
    rnd.shuffle(raw)
    return HSet(raw)


@given(formulas.filter(is_delta0), st.fixed_dictionaries({"x": hf_values, "y": hf_values, "z": hf_values}), st.randoms())
def test_extensionality_invariance(f, env, rnd):
    base = _outcome(f, env)
    for _ in range(3):
        assert _outcome(f, {k: _variant(v, rnd) for k, v in env.items()}) == base


@given(formulas.filter(is_sigma), st.fixed_dictionaries({"x": hf_values, "y": hf_values, "z": hf_values}))
def test_sigma_true_is_verified(f, env):
    try:
        res = eval_sigma(f, env, SearchBudget(max_witnesses=200, atom_pool=(0, 1), max_rank=1))
    except LiftingError:
        # ill-typed on the given values, not inside a witness search
        return
    if res:
        assert eval_delta0(res.instance, env)


def test_raw_lists_canonicalize_like_hsets():
    rnd = random.Random(3)
    for _ in range(100):
        raw = [[rnd.randint(0, 2) for _ in range(rnd.randint(0, 3))] for _ in range(rnd.randint(0, 3))]
        shuffled = [sorted(r, reverse=True) * 2 for r in raw][::-1]
        assert canonicalize(raw) == canonicalize(shuffled)
