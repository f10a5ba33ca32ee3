import numpy as np
import pytest

from magring.circle import Grid

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def grid():
    return Grid(512)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
