import numpy as np
import pytest

from levydiff.potential import PotentialSpec

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def db3():
    return PotentialSpec.drifted_brownian(3.0)


@pytest.fixture
def cp131():
    return PotentialSpec.drift_minus_cp(1.0, 3.0, 1.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
