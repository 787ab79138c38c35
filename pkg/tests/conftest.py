import numpy as np
import pytest

from sopieces.gf import field_of_order
from sopieces.quadspace import space_from_descriptor


@pytest.fixture
def gf2():
    return field_of_order(2)


@pytest.fixture
def gf3():
    return field_of_order(3)


def space(desc, q):
    return space_from_descriptor(desc, q)


def beta_example(beta=1):
    """D=3 over GF(2) in the basis e, f, r: N(f) = beta^2 e + beta r, N(e) = N(r) = 0."""
    s = space("D3", 2)
    # standard odd model: hyperbolic pair on coordinates 0, 1 and radical on 2
    N = np.zeros((3, 3), dtype=np.int64)
    N[0, 1] = beta * beta % 2
    N[2, 1] = beta % 2
    return s, N


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
