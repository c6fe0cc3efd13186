import io
import json
import sys
from fractions import Fraction
from pathlib import Path

import jsonschema
import pytest

from conftest import FIXTURES, FORMULAS, fixture_machine
from rbss.cli import main
from rbss.coding import encode, encode_seq
from rbss.formula import SearchBudget, eval_sigma, parse_formula
from rbss.hf import format_hf, parse_hf
from rbss.machine import Output, Undefined, run
from rbss.realparam import exp_cert, ln_bounds, ln_cert
from rbss.rinf import RInfinity
from rbss.scalar import format_rational

GOLDEN = Path(__file__).resolve().parent / "golden"
SCHEMAS = FIXTURES.parent / "schemas"

sys.path.insert(0, str(GOLDEN))
import make_golden  # noqa: E402


def cli(*args):
    buf = io.StringIO()
    code = main([str(a) for a in args], buf)
    return code, buf.getvalue()


def _run_rows():
    for line in (GOLDEN / "run.tsv").read_text().splitlines():
        machine, x, code, text = line.split("\t")
        yield machine, x, int(code), text


def _eval_blocks():
    blocks = {}
    name = None
    for line in (GOLDEN / "eval.txt").read_text().splitlines(keepends=True):
        if line.startswith("== "):
            _, name, _, code = line.split()
            blocks[name] = [int(code), ""]
        else:
            blocks[name][1] += line
    return blocks


RUN_ROWS = list(_run_rows())
EVAL_BLOCKS = _eval_blocks()


def test_golden_corpus_size():
    assert len({r[0] for r in RUN_ROWS}) >= 5
    assert len(EVAL_BLOCKS) >= 10


@pytest.mark.parametrize("machine,x,code,text", RUN_ROWS)
def test_run_golden(machine, x, code, text):
    got_code, got = cli(*make_golden.run_args(machine, x))
    assert (got_code, got.rstrip()) == (code, text)


@pytest.mark.parametrize("machine,x,code,text", RUN_ROWS)
def test_run_golden_matches_library(machine, x, code, text):
    values = [Fraction(v) for v in x.split(",")]
    res = run(fixture_machine(machine), values, 200)
    if isinstance(res, Output):
        assert code == 0
        assert text == ", ".join(format_rational(v) for v in res.values)
    elif isinstance(res, Undefined):
        assert code == 1 and text.startswith("undefined")
    else:
        assert code == 1 and text.startswith("diverged")


@pytest.mark.parametrize("name", sorted(EVAL_BLOCKS))
def test_eval_golden(name):
    code, text = EVAL_BLOCKS[name]
    assert cli(*make_golden.eval_args(name)) == (code, text)


@pytest.mark.parametrize("name", sorted(EVAL_BLOCKS))
def test_eval_golden_matches_library(name):
    binds, pool = make_golden.EVALS[name]
    env = {}
    for b in binds:
        var, _, text = b.partition("=")
        env[var] = parse_hf(text)
    res = eval_sigma(parse_formula((FORMULAS / f"{name}.sexp").read_text()), env, SearchBudget(atom_pool=[Fraction(p) for p in pool.split(",")]))
    code, text = EVAL_BLOCKS[name]
    assert text.splitlines()[0] == res.status
    assert code == (0 if res else 1)
    shown = [ln.strip() for ln in text.splitlines()[1:]]
    expected = [f"{v} := " + ", ".join(format_hf(w) for w in ws) for _, (v, ws) in sorted(res.witnesses.items())]
    assert shown == expected


def test_spec_examples():
    assert cli("run", FIXTURES / "square.bssm", "--input", "3", "--fuel", "1000") == (0, "9\n")
    assert cli("ln", "--x", "2", "--n", "2") == (0, "[7/12, 5/6]\n")


def test_missing_file(capsys):
    code, _ = cli("run", "missing.bssm", "--input", "1")
    assert code == 2
    assert "missing.bssm" in capsys.readouterr().err


@pytest.mark.parametrize(
    "args",
    [
        ["run"],
        ["frobnicate"],
        ["run", FIXTURES / "square.bssm", "--bogus"],
        ["run", FIXTURES / "square.bssm", "--input", "1/0"],
        ["run", FIXTURES / "square.bssm", "--input", "abc"],
        ["ln"],
        ["ln", "--x", "2", "--n", "2", "--eps", "1/10"],
        ["ln", "--x", "0"],
        ["check", "eq", "1"],
        ["check", "eq", "1", "nines:1/3"],
        ["decode", "{atom(1"],
        ["eval", FORMULAS / "less.sexp", "--bind", "x"],
    ],
)
def test_usage_errors(args):
    assert cli(*args)[0] == 2


def test_bad_machine_file(tmp_path, capsys):
    p = tmp_path / "bad.bssm"
    p.write_text("machine bad\ninput 1 -> nowhere\n")
    assert cli("run", p, "--input", "1")[0] == 2
    assert "line" in capsys.readouterr().err


def test_decimal_display():
    assert cli("run", FIXTURES / "halve.bssm", "--input", "5", "--decimal", "3") == (0, "0.625\n")
    code, text = cli("ln", "--x", "2", "--eps", "1/1000000", "--decimal", "5")
    lo, hi = text.strip()[1:-1].split(", ")
    assert float(lo) <= 0.693147 <= float(hi)


def test_run_json():
    code, text = cli("run", FIXTURES / "reciprocal.bssm", "--input", "0", "--json")
    assert code == 1
    assert json.loads(text) == {"kind": "undefined", "reason": "division-by-zero"}


@pytest.mark.parametrize("machine,x", [("square", "3"), ("halve", "5"), ("shift_sum", "2,3"), ("reciprocal", "0"), ("loop", "1")])
def test_trace_json_validates(machine, x):
    schema = json.loads((SCHEMAS / "trace.schema.json").read_text())
    code, text = cli("trace", FIXTURES / f"{machine}.bssm", "--input", x, "--fuel", "30", "--json")
    doc = json.loads(text)
    jsonschema.validate(doc, schema)
    assert doc["machine"] == machine


@pytest.mark.parametrize("machine", ["abs", "halve", "poly_piece", "reciprocal", "unit_interval", "loop"])
def test_paths_json_validates(machine):
    schema = json.loads((SCHEMAS / "paths.schema.json").read_text())
    code, text = cli("paths", FIXTURES / f"{machine}.bssm", "--depth", "12", "--json")
    assert code == 0
    doc = json.loads(text)
    jsonschema.validate(doc, schema)
    assert doc["depth"] == 12


def test_paths_parallel_matches():
    a = cli("paths", FIXTURES / "halve.bssm", "--depth", "12")
    b = cli("paths", FIXTURES / "halve.bssm", "--depth", "12", "--parallel")
    assert a == b and a[0] == 0


def test_trace_text():
    code, text = cli("trace", FIXTURES / "square.bssm", "--input", "3")
    assert code == 0
    assert text.splitlines()[-1] == "output 9"
    assert len(text.splitlines()) == 4


def test_encode_decode():
    v = RInfinity({0: 5, 1: 5})
    code, text = cli("encode", "--input", "5,5")
    assert (code, text) == (0, format_hf(encode(v)) + "\n")
    assert cli("decode", text.strip()) == (0, "0:5 1:5\n")
    code, flat = cli("encode", "--input", "1/2,0,3", "--offset", "-1", "--flat")
    assert flat.strip() == format_hf(encode_seq(RInfinity({-1: Fraction(1, 2), 1: 3})))
    assert cli("decode", flat.strip(), "--flat") == (0, "-1:1/2 1:3\n")
    assert cli("decode", "{{}}") == (1, "not a code\n")


def test_ln_exp_match_library():
    assert cli("ln", "--x", "3", "--n", "10")[1].strip() == str(ln_bounds(3, 10))
    assert cli("ln", "--x", "1/2", "--eps", "1/1000")[1].strip() == str(ln_cert(Fraction(1, 2), Fraction(1, 1000)))
    assert cli("exp", "--x", "-1", "--eps", "1/1000")[1].strip() == str(exp_cert(-1, Fraction(1, 1000)))


def test_check_commands():
    assert cli("check", "eq", "1/2", "3/5", "--n", "1") == (0, "refuted@1\n")
    assert cli("check", "eq", "1/2", "3/5", "--n", "1", "--assert") == (1, "refuted@1\n")
    assert cli("check", "eq", "1", "nines:1", "--n", "20", "--assert") == (0, "consistent@20\n")
    assert cli("check", "add", "1", "1", "3", "--n", "2") == (0, "refuted@2\n")
    assert cli("check", "mul", "-1/3", "3", "-1", "--n", "30") == (0, "consistent@30\n")


def test_compile_sigma(tmp_path):
    code, text = cli("compile-sigma", FIXTURES / "square.bssm", "--cograph")
    assert code == 0
    assert text.startswith(";; graph square/1\n") and ";; cograph square/1" in text
    code, text = cli("compile-sigma", FIXTURES / "loop.bssm")
    assert code == 0 and ";; cograph" not in text
    assert cli("compile-sigma", FIXTURES / "loop.bssm", "--cograph")[0] == 2
    code, text = cli("compile-sigma", f"universe={FIXTURES / 'unit_interval.bssm'}")
    assert code == 0 and text.startswith(";; psi0\n")


def test_eval_from_stdin(monkeypatch):
    monkeypatch.setattr(sys, "stdin", io.StringIO("(exists y (mul ({y}) ({y}) ({4})))"))
    assert cli("eval", "-", "--pool", "0,2") == (0, "true\n  y := atom(2)\n")


def test_eval_lifting_error(monkeypatch):
    # x is bound to a bare atom, not a singleton of one
    monkeypatch.setattr(sys, "stdin", io.StringIO("(less x ({1}))"))
    code, text = cli("eval", "-", "--bind", "x=atom(0)")
    assert code == 1 and text.startswith("error: less:")


def test_output_is_deterministic():
    a = cli("eval", FORMULAS / "sum_product.sexp", "--pool", "0,1,2", "--seed", "1")
    b = cli("eval", FORMULAS / "sum_product.sexp", "--pool", "0,1,2", "--seed", "9")
    assert a == b
