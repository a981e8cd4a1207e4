"""The acceptance criteria, one test each, at their stated tolerances.

Each test prints a PASS/FAIL line; the lines are also
collected into the terminal summary.
"""
import pytest

from padic_henon.acceptance import CRITERIA, run_criterion

RESULTS: dict[int, str] = {}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    result = run_criterion(number)
    RESULTS[number] = result.line()
    print(result.line())
    assert result.passed, result.line()
