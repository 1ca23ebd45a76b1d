import numpy as np
import pytest

from nnhankel.io import load_fixture

# reference corrected generators for the two worked examples (4 decimals)
EXAMPLE1_CORRECTED = np.array([0.7482, 0, 0, 0.5342, 0.8847, 0, 0, 1.4354, 10.7154])
EXAMPLE2_CORRECTED = np.array([0, 0.2849, 0.0746, 0, 0, 0, 0, 0.1552, 0])


@pytest.fixture
def example1():
    return load_fixture("example1")


@pytest.fixture
def example2():
    return load_fixture("example2")


@pytest.fixture
def intro3x3():
    return load_fixture("intro3x3")


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
