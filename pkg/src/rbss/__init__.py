"""Exact BSS machines over the reals, HF(R) formulas, Σ presentations and
certified decimal checks."""

from .coding import code_tuple, decode, decode_seq, decode_tuple, encode, encode_seq
from .formula import SearchBudget, eval_delta0, eval_sigma, format_formula, parse_formula
from .hf import EMPTY, Atom, HSet, format_hf, parse_hf
from .machine import Diverged, Output, Undefined, load_machine, parse_machine, run, step, trace
from .paths import enumerate_paths
from .realparam import arith_check, eq_check, exp_cert, ln_bounds, ln_cert, xi
from .rinf import RInfinity
from .trees import tree_rank, tree_unrank, zigzag

__version__ = "0.1.0"

__all__ = [
    "code_tuple",
    "decode",
    "decode_seq",
    "decode_tuple",
    "encode",
    "encode_seq",
    "SearchBudget",
    "eval_delta0",
    "eval_sigma",
    "format_formula",
    "parse_formula",
    "EMPTY",
    "Atom",
    "HSet",
    "format_hf",
    "parse_hf",
    "Diverged",
    "Output",
    "Undefined",
    "load_machine",
    "parse_machine",
    "run",
    "step",
    "trace",
    "enumerate_paths",
    "arith_check",
    "eq_check",
    "exp_cert",
    "ln_bounds",
    "ln_cert",
    "xi",
    "RInfinity",
    "tree_rank",
    "tree_unrank",
    "zigzag",
]
