import sys
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import settings

from rbss.machine import load_machine, parse_machine

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "rbss" / "fixtures"
FORMULAS = FIXTURES / "formulas"

settings.register_profile("repo", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("repo")


def fixture_machine(name):
    return load_machine(FIXTURES / f"{name}.bssm")


@pytest.fixture(scope="session")
def machines():
    return {p.stem: load_machine(p) for p in sorted(FIXTURES.glob("*.bssm"))}


@pytest.fixture(scope="session")
def id1():
    return parse_machine("machine id1\ntotal\ninput 1 -> out\nnode out output [1]\n")


def q(text):
    return Fraction(text)


def pytest_terminal_summary(terminalreporter, config):
    # criterion lines are swallowed by output capture; repeat them here
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "REPORT", [])
    if lines and config.getoption("capture") != "no":
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
