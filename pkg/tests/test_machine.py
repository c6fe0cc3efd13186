from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rbss.machine import (
    Configuration,
    Diverged,
    MachineError,
    Output,
    Undefined,
    parse_machine,
    run,
    step,
    trace,
    trace_to_json,
)
from rbss.rinf import RInfinity

from conftest import fixture_machine

SQUARE = """
machine square
input 1 -> sq
node sq compute x1 := x1*x1 goto out
node out output [1]
"""


def test_parse_square_has_three_nodes():
    m = parse_machine(SQUARE)
    assert len(m.nodes) == 3
    assert m.arity == 1


def test_undeclared_reference_is_named():
    with pytest.raises(MachineError, match="foo"):
        parse_machine("machine bad\ninput 1 -> foo\nnode out output [1]\n")


def test_branch_missing_edge():
    src = "machine bad\ninput 1 -> b\nnode b branch x1 ? out\nnode out output [1]\n"
    with pytest.raises(MachineError, match="exactly two output edges"):
        parse_machine(src)


def test_errors_carry_line_numbers():
    src = "machine bad\ninput 1 -> a\nnode a compute x1 := x1 goto b\nnode a output [1]\n"
    with pytest.raises(MachineError, match="line"):
        parse_machine(src)


def test_branch_takes_edge1_at_zero():
    m = fixture_machine("abs")
    branch = next(i for i, n in m.nodes.items() if type(n).__name__ == "BranchNode")
    nxt = step(m, Configuration(branch, RInfinity({1: 0}), 3))
    assert nxt.node == m.nodes[branch].on_nonneg
    assert nxt.step_count == 4


def test_shift_left_moves_down():
    m = parse_machine("machine s\ninput 1 -> sh\nnode sh shift left goto out\nnode out output [0]\n")
    nxt = step(m, Configuration("sh", RInfinity({1: 7}), 1))
    assert nxt.state == RInfinity({0: 7})


def test_division_by_zero_is_undefined():
    m = fixture_machine("reciprocal")
    assert run(m, [0], 100) == Undefined("division-by-zero")
    assert run(m, [4], 100) == Output((Fraction(1, 4),))


def test_worked_runs():
    assert run(fixture_machine("square"), [3], 1000) == Output((Fraction(9),))
    assert run(fixture_machine("identity"), [5, 7], 1000) == Output((Fraction(5), Fraction(7)))
    assert run(fixture_machine("loop"), [1], 100) == Diverged(100)


def test_square_trace_has_three_configurations():
    tr = trace(fixture_machine("square"), [3], 1000)
    assert len(tr.steps) == 3
    assert tr.steps[-1].node == "out"
    assert [c.step_count for c in tr.steps] == [0, 1, 2]


def test_loop_trace_respects_fuel():
    tr = trace(fixture_machine("loop"), [1], 5)
    assert len(tr.steps) == 5
    assert tr.result == Diverged(5)


def test_trace_json_shape():
    doc = trace_to_json(fixture_machine("square"), trace(fixture_machine("square"), [3], 10))
    assert doc["result"] == {"kind": "output", "values": ["9/1"]}
    assert doc["steps"][0]["state"] == {"0": "3/1"}


def test_fuel_must_be_positive():
    with pytest.raises(ValueError):
        run(fixture_machine("square"), [1], 0)


rationals = st.fractions(min_value=-50, max_value=50, max_denominator=30)


@given(rationals)
def test_runs_are_repeatable(x):
    m = fixture_machine("poly_piece")
    assert run(m, [x], 50) == run(m, [x], 50)


@given(rationals)
def test_trace_agrees_with_run(x):
    for name in ("abs", "halve", "reciprocal", "poly_piece"):
        m = fixture_machine(name)
        tr = trace(m, [x], 60)
        assert tr.result == run(m, [x], 60)
        counts = [c.step_count for c in tr.steps]
        assert counts == list(range(len(counts)))
        if isinstance(tr.result, Output):
            out = m.nodes[tr.steps[-1].node]
            assert tr.result.values == tuple(tr.steps[-1].state[i] for i in out.coords)
