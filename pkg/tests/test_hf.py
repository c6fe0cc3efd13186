import pytest
from hypothesis import given
from hypothesis import strategies as st

from rbss.hf import EMPTY, Atom, HSet, canonicalize, format_hf, hf_equal, hf_member, hf_rank, parse_hf, single

raw_hf = st.recursive(
    st.integers(-3, 3),
    lambda inner: st.lists(inner, max_size=4),
    max_leaves=12,
)


def test_extensional_collapse():
    assert canonicalize([[], []]) == HSet((EMPTY,))


def test_order_normalised():
    a = canonicalize([[1], [0]])
    assert a.elements == canonicalize([[0], [1]]).elements


def test_membership_examples():
    assert hf_member(EMPTY, single(EMPTY))
    assert not hf_member(single(EMPTY), EMPTY)
    assert hf_equal(canonicalize([[], [[]]]), canonicalize([[[]], []]))


def test_atoms_have_no_members():
    with pytest.raises(TypeError):
        hf_member(EMPTY, Atom(1))


def test_rank():
    assert hf_rank(Atom(5)) == 0
    assert hf_rank(EMPTY) == 1
    assert hf_rank(canonicalize([[[]]])) == 3


@given(raw_hf)
def test_canonicalize_idempotent(raw):
    x = canonicalize(raw)
    assert canonicalize(x) == x


@given(raw_hf)
def test_text_round_trip(raw):
    x = canonicalize(raw)
    text = format_hf(x)
    assert parse_hf(text) == x
    assert format_hf(parse_hf(text)) == text


@given(raw_hf, st.randoms(use_true_random=False))
def test_permutation_and_duplication_invariance(raw, rnd):
    if not isinstance(raw, list):
        return
    shuffled = list(raw) + list(raw[: rnd.randint(0, len(raw))])
    rnd.shuffle(shuffled)
    assert canonicalize(shuffled) == canonicalize(raw)
    assert hash(canonicalize(shuffled)) == hash(canonicalize(raw))


def test_rational_atoms_print_exactly():
    assert format_hf(parse_hf("{atom(1/2), atom(-3)}")) == "{atom(-3), atom(1/2)}"
