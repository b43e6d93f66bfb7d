import math

import numpy as np
import pytest

from centralspin.model import BathModel, CentralSpinParams

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def weak_bath():
    return BathModel.homogeneous(10, 1.0, 0.05)


@pytest.fixture
def equator():
    return CentralSpinParams(1.0, math.pi / 2)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
