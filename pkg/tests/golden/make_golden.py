"""Rewrite the golden CLI transcripts: python3 tests/golden/make_golden.py"""

import io
from pathlib import Path

from rbss.cli import main

HERE = Path(__file__).resolve().parent
FIXTURES = HERE.parent.parent / "src" / "rbss" / "fixtures"

RUNS = {
    "square": ["3", "-1/2", "0"],
    "abs": ["-3", "5/2", "0"],
    "halve": ["5", "1/3", "1"],
    "clamp_sub": ["1,4", "4,1", "1/2,1/2"],
    "poly_piece": ["2", "1/2", "1"],
    "shift_sum": ["2,3", "-1,1/3"],
    "reciprocal": ["4", "0"],
    "loop": ["1"],
    "unit_interval": ["1/2", "2", "0"],
}

# formula -> (bindings, pool)
EVALS = {
    name: (["x={atom(1), atom(2)}"], "0,1,-1,2,3")
    for name in (
        "sqrt_four", "less", "empty_member", "extensional", "pair_set",
        "sum_product", "zero_or_one", "sqrt_minus_one", "add_false", "no_max",
    )
}
EVALS["square_of"] = (["x={atom(9)}"], "0,3")
EVALS["has_index_one"] = (["x={{{atom(0)}, {{atom(2)}}}, {{atom(1)}, {{atom(2)}}}, {{atom(2)}, {{atom(5)}}}}"], "0,1")


def run_args(machine, x):
    return ["run", str(FIXTURES / f"{machine}.bssm"), "--input", x, "--fuel", "200"]


def eval_args(name):
    binds, pool = EVALS[name]
    args = ["eval", str(FIXTURES / "formulas" / f"{name}.sexp"), "--pool", pool]
    for b in binds:
        args += ["--bind", b]
    return args


def transcript(args):
    buf = io.StringIO()
    code = main(args, buf)
    return code, buf.getvalue()


def main_():
    lines = []
    for m, inputs in RUNS.items():
        for x in inputs:
            code, text = transcript(run_args(m, x))
            lines.append(f"{m}\t{x}\t{code}\t{text.rstrip()}")
    (HERE / "run.tsv").write_text("\n".join(lines) + "\n")
    chunks = []
    for name in EVALS:
        code, text = transcript(eval_args(name))
        chunks.append(f"== {name} exit {code}\n{text}")
    (HERE / "eval.txt").write_text("".join(chunks))


if __name__ == "__main__":
    main_()
