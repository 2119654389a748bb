import numpy as np
import pytest

from circleflow.spectral import GridSpec

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def grid64():
    return GridSpec(64)


@pytest.fixture
def grid32():
    return GridSpec(32)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
