import numpy as np
import pytest

from lipfree.grid import build_enumeration
from lipfree.metric import space_from_matrix


@pytest.fixture(scope="session")
def enum2():
    return build_enumeration(2, 2)


@pytest.fixture(scope="session")
def enum1():
    return build_enumeration(1, 3)


@pytest.fixture
def triangle():
    """o, a, b with d(o,a) = d(o,b) = 1 and d(a,b) = 2."""
    D = np.array([[0, 1, 1], [1, 0, 2], [1, 2, 0]])
    return space_from_matrix(D, labels=("o", "a", "b"))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
