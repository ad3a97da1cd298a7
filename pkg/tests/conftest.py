import numpy as np
import pytest

from stackel_dn.fixtures import load_fixture

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def f1():
    return load_fixture("f1")


@pytest.fixture(scope="session")
def f2():
    return load_fixture("f2")


@pytest.fixture(scope="session")
def f3():
    return load_fixture("f3")


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def f1_pairs(count):
    """Exact F1 joint spectrum (2j²+k², j²+k²), sorted like the solvers."""
    pts = sorted({(2 * j * j + k * k, j * j + k * k) for j in range(12) for k in range(12)})
    return pts[:count]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
