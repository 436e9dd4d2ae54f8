from __future__ import annotations

import numpy as np
import pytest

from superenergy.lorentz import basis_covector, minkowski


@pytest.fixture
def mink4():
    return minkowski(4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def dx(frame, i):
    return basis_covector(frame, i)


# acceptance lines collected by test_acceptance.py, echoed after the run
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
