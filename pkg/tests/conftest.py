import numpy as np
import pytest

from nrgraph.dist import ParetoTail, WeightSequence, build_weights

ACCEPTANCE_LINES = []


@pytest.fixture
def w211():
    return WeightSequence(np.array([2.0, 1.0, 1.0]))


@pytest.fixture
def w11():
    return WeightSequence(np.array([1.0, 1.0]))


@pytest.fixture
def crit35_n4():
    return build_weights(ParetoTail.critical(3.5), 4)


def within(est, target, se, sigmas=3.0):
    return abs(est - target) <= sigmas * se


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
