"""One test per acceptance criterion, each at its stated tolerance.

Every test prints a single [PASS]/[FAIL] line; the lines are repeated in the
terminal summary. Run this file directly to print the lines without pytest.
"""

from __future__ import annotations

import pytest

from superenergy.acceptance import CRITERIA, run_criterion

from conftest import ACCEPTANCE_LINES


@pytest.mark.parametrize("number", range(1, len(CRITERIA) + 1))
def test_criterion(number):
    res = run_criterion(number)
    line = res.line()
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert res.passed, line


if __name__ == "__main__":
    for n in range(1, len(CRITERIA) + 1):
        print(run_criterion(n).line())
