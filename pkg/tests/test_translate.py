from fractions import Fraction

import pytest

from conftest import fixture_machine
from rbss.coding import code_tuple, decode, decode_tuple, encode
from rbss.formula import FormulaError, SearchBudget, eval_delta0, free_vars, is_sigma, parse_formula
from rbss.hf import Atom, HSet
from rbss.machine import parse_machine, run
from rbss.rinf import RInfinity
from rbss.translate import (
    SigmaScheme,
    TotalityError,
    build_m_prime,
    compose_formula,
    format_function,
    format_presentation,
    graph_formula,
    juxtapose_formula,
    mu_formula,
    parse_presentation,
    primrec_formula,
    sigma_semidecide,
    structure_presentation,
    trace_code,
)

LT = "machine lt\ntotal\ninput 2 -> t\nnode t branch x1 - x2 ? no : yes\nnode yes compute x1 := 1 goto out\nnode no compute x1 := 0 goto out\nnode out output [1]\n"


@pytest.fixture(scope="module")
def square():
    return graph_formula(fixture_machine("square"), want_cograph=True)


def test_graph_and_cograph_are_sigma(square):
    for f in (square.graph, square.cograph):
        assert is_sigma(f)
        assert free_vars(f) == {"x", "y"}


def test_square_graph(square):
    assert square.check_graph((3,), (9,))
    assert square.check_graph((Fraction(-1, 2),), (Fraction(1, 4),))
    assert not square.check_graph((3,), (8,))


def test_square_cograph(square):
    assert square.check_cograph((3,), (8,))
    assert not square.check_cograph((3,), (9,))


def test_identity_graph():
    ident = graph_formula(fixture_machine("identity"))
    assert ident.check_graph((5, 2), (5, 2))
    assert not ident.check_graph((5, 2), (2, 5))


def test_witness_is_the_trace(square):
    res = square.check_graph((3,), (9,))
    (_, ws), = res.witnesses.values()
    assert ws == (trace_code(fixture_machine("square"), (3,)),)
    assert eval_delta0(res.instance, square.env((3,), (9,)))


def test_undeclared_machine_has_no_cograph():
    loop = fixture_machine("loop")
    assert graph_formula(loop).cograph is None
    with pytest.raises(TotalityError):
        graph_formula(loop, want_cograph=True)
    with pytest.raises(TotalityError):
        graph_formula(fixture_machine("reciprocal")).check_cograph((2,), (1,))


def test_declaring_totality_yields_cograph():
    d = graph_formula(fixture_machine("reciprocal"), total=True, want_cograph=True)
    assert d.cograph is not None
    assert d.check_graph((4,), (Fraction(1, 4),))


def test_nonterminating_input_has_no_trace():
    assert trace_code(fixture_machine("loop"), (1,), fuel=50) is None
    assert not graph_formula(fixture_machine("loop")).check_graph((1,), (2,))


def test_undefined_point_not_in_graph():
    d = graph_formula(fixture_machine("reciprocal"))
    assert not d.check_graph((0,), (0,))


@pytest.mark.parametrize("name,x", [("abs", -3), ("halve", 5), ("clamp_sub", (1, 4)), ("poly_piece", 2), ("shift_sum", (2, 3))])
def test_graph_matches_interpreter(name, x):
    m = fixture_machine(name)
    x = x if isinstance(x, tuple) else (x,)
    out = run(m, x, 1000).values
    d = graph_formula(m, want_cograph=True)
    assert d.check_graph(x, out)
    wrong = tuple(v + 1 for v in out)
    assert not d.check_graph(x, wrong)
    assert d.check_cograph(x, wrong)
    assert not d.check_cograph(x, out)


def test_compose(square):
    sq4 = compose_formula(square, square)
    assert sq4.oracle((Fraction(2),)) == (Fraction(16),)
    assert sq4.check_graph((2,), (16,))
    assert sq4.check_cograph((2,), (15,))
    assert not sq4.check_graph((2,), (15,))


def test_juxtapose(id1):
    d = graph_formula(id1, want_cograph=True)
    both = juxtapose_formula(d, d)
    assert both.out_arity == 2
    assert both.check_graph((3,), (3, 3))
    assert both.check_cograph((3,), (3, 4))


def test_power_by_primitive_recursion():
    g = graph_formula(fixture_machine("const_one"), want_cograph=True)
    h = graph_formula(fixture_machine("times_last"), want_cograph=True)
    power = primrec_formula(g, h)
    assert power.oracle((Fraction(3), Fraction(2))) == (Fraction(8),)
    assert power.check_graph((3, 2), (8,))
    assert not power.check_graph((3, 2), (9,))


def test_least_zero():
    phi = graph_formula(fixture_machine("clamp_sub"), want_cograph=True)
    mu = mu_formula(phi)
    assert mu.cograph is None
    assert mu.oracle((Fraction(5, 2),)) == (Fraction(3),)
    assert mu.check_graph((Fraction(5, 2),), (3,))
    assert not mu.check_graph((Fraction(5, 2),), (2,))
    assert not mu.check_graph((Fraction(5, 2),), (4,))


@pytest.fixture(scope="module")
def unit_scheme():
    return structure_presentation({"universe": fixture_machine("unit_interval"), "lt": parse_machine(LT)})


def test_structure_universe(unit_scheme):
    assert unit_scheme.evaluate("psi0", [code_tuple((Fraction(1, 2),))])
    assert not unit_scheme.evaluate("psi0", [code_tuple((2,))])
    assert unit_scheme.evaluate("psi0*", [code_tuple((2,))])
    assert not unit_scheme.evaluate("psi0*", [code_tuple((Fraction(1, 2),))])


def test_structure_relations(unit_scheme):
    half, one = code_tuple((Fraction(1, 2),)), code_tuple((1,))
    assert unit_scheme.evaluate("phi:lt", [half, one])
    assert unit_scheme.evaluate("phi*:lt", [one, half])
    assert unit_scheme.evaluate("psi1", [half, half])
    assert unit_scheme.evaluate("psi1*", [half, one])
    with pytest.raises(ValueError):
        unit_scheme.evaluate("phi:lt", [half])
    with pytest.raises(KeyError):
        unit_scheme.formula("phi:gt")


def test_structure_needs_total_machines():
    with pytest.raises(TotalityError):
        structure_presentation({"universe": fixture_machine("reciprocal")})
    with pytest.raises(KeyError):
        structure_presentation({"lt": parse_machine(LT)})


def test_presentation_text_round_trip(unit_scheme):
    text = format_presentation(unit_scheme)
    back = parse_presentation(text)
    assert back.signature == unit_scheme.signature
    for sel in unit_scheme.selectors():
        assert back.formula(sel) == unit_scheme.formula(sel)
    assert format_presentation(back) == text


def test_function_text_has_both_parts(square):
    text = format_function(square)
    assert text.startswith(";; graph square/1\n")
    assert ";; cograph square/1\n" in text


# U(x1): x1 codes (q,) and some witness w = encode({0: r}) has r * r = q.
# The entry {{1}, {{q}}} of x1 and the entry {{0}, {{r}}} of w are picked
# apart by their index singletons.
SQRT = (
    "(exists w (exists-in e x1 (exists-in i e (and (= i ({1})) (exists-in v e (and (not (= v i)) "
    "(exists-in b v (exists-in p w (and (not (= p ({0}))) (exists-in a p (mul a a b)))))))))))"
)


def _sqrt_scheme():
    u = parse_formula(SQRT)
    same = parse_formula("(= x1 x2)")
    return SigmaScheme(u, u, same, same, {}, {})


def test_semidecide_square_root():
    scheme = _sqrt_scheme()
    res = sigma_semidecide(scheme, "psi0", [code_tuple((4,))], SearchBudget(atom_pool=(0, 1, -1, 2)))
    assert res
    assert eval_delta0(res.instance, scheme.env([code_tuple((4,))]))
    (w,) = res.witnesses[()].values()
    assert w in (encode(RInfinity({0: 2})), encode(RInfinity({0: -2})))


def test_semidecide_no_square_root():
    scheme = _sqrt_scheme()
    budget = SearchBudget(max_witnesses=10_000, atom_pool=(0, 1, -1, 2, 3))
    assert sigma_semidecide(scheme, "psi0", [code_tuple((-1,))], budget).status == "unknown"


def test_semidecide_not_a_code():
    scheme = _sqrt_scheme()
    assert sigma_semidecide(scheme, "psi0", [HSet((Atom(4),))]).status == "unknown"


def test_semidecide_on_codes(unit_scheme):
    half = code_tuple((Fraction(1, 2),))
    two = code_tuple((2,))
    assert sigma_semidecide(unit_scheme, "psi0", [half])
    assert sigma_semidecide(unit_scheme, "psi0*", [two])
    assert sigma_semidecide(unit_scheme, "phi:lt", [half, code_tuple((1,))])
    # guard: 2 is outside the universe
    assert sigma_semidecide(unit_scheme, "phi:lt", [half, two]).status == "unknown"


def test_semidecide_rejects_non_codes(unit_scheme):
    assert sigma_semidecide(unit_scheme, "psi0", [Atom(1)]).status == "unknown"
    # the 1-tuple of zero is not an encode() image
    assert sigma_semidecide(unit_scheme, "psi0", [code_tuple((0,))]).status == "unknown"


IN_UNIT = (
    "(exists-in e x1 (exists-in i e (and (= i ({1})) (exists-in v e (and (not (= v i)) "
    "(exists-in b v (and (not (less b ({0}))) (not (less ({1}) b)))))))))"
)


def test_m_prime_unit_interval():
    matrix = parse_formula(f"(and (= w x1) {IN_UNIT})")
    pool = (0, 1, Fraction(1, 2), 2)
    mp = build_m_prime(None, matrix, SearchBudget(max_witnesses=10_000, atom_pool=pool))
    assert mp.elements
    for el in mp.elements:
        (c,) = el.carrier
        v = decode(c)
        assert v == el.witness
        assert 0 <= v[1] <= 1
    carriers = mp.carriers()
    assert (code_tuple((Fraction(1, 2),)),) in carriers
    assert (code_tuple((1,)),) in carriers
    assert (code_tuple((2,)),) not in carriers
    # code((0,)) is not an encode() image, so it is never a carrier
    assert (code_tuple((0,)),) not in carriers


def test_m_prime_equality_ignores_witness():
    from rbss.translate import MPrimeElement

    a = MPrimeElement((code_tuple((1,)),), RInfinity({0: 1}))
    b = MPrimeElement((code_tuple((1,)),), RInfinity({0: 2}))
    assert a == b and hash(a) == hash(b)


def test_m_prime_relations():
    matrix = parse_formula(f"(and (= w x1) {IN_UNIT})")
    lt = parse_formula(
        "(exists-in e x1 (exists-in f x2 (exists-in i e (exists-in j f (and (= i ({1})) (= j ({1})) "
        "(exists-in v e (exists-in u f (and (not (= v i)) (not (= u j)) "
        "(exists-in b v (exists-in c u (less b c)))))))))))"
    )
    mp = build_m_prime(None, matrix, SearchBudget(max_witnesses=10_000, atom_pool=(1, Fraction(1, 2))), predicate_matrices={"lt": lt})
    by_value = {decode_tuple(el.carrier[0]): el for el in mp.elements if decode_tuple(el.carrier[0])}
    half, one = by_value[(Fraction(1, 2),)], by_value[(Fraction(1),)]
    assert mp.holds("lt", [half, one])
    assert not mp.holds("lt", [one, half])


def test_m_prime_rejects_unbounded_matrix():
    with pytest.raises(FormulaError):
        build_m_prime(None, parse_formula("(exists y (= y x1))"))
