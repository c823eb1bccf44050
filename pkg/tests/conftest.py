import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nblsat import CnfFormula  # noqa: E402

ACCEPTANCE: list[str] = []

INSTANCES = Path(__file__).resolve().parent.parent / "instances"

EXAMPLE5 = [[-1], [2, 3], [1, -3], [-1, -2, 3]]
EXAMPLE6 = [[1, -2], [-1, -2]]
EXAMPLE7 = [[1], [-1]]
S_UNSAT = [[1, 2], [1, -2], [-1, 2], [-1, -2]]
S_SAT = [[1, -2], [-1, -2], [1, -2], [-1, -2]]


@pytest.fixture
def ex5():
    return CnfFormula.from_ints(3, EXAMPLE5)


@pytest.fixture
def ex6():
    return CnfFormula.from_ints(2, EXAMPLE6)


@pytest.fixture
def ex7():
    return CnfFormula.from_ints(1, EXAMPLE7)


@pytest.fixture
def s_unsat():
    return CnfFormula.from_ints(2, S_UNSAT)


@pytest.fixture
def s_sat():
    return CnfFormula.from_ints(2, S_SAT)


@pytest.fixture
def instances():
    return INSTANCES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda l: int(l.split("[")[1].split("]")[0])):
            terminalreporter.write_line(line)
