"""Acceptance criteria 1-7, each at its stated tolerance.

One PASS/FAIL line (with the measured clauses) is printed per criterion.
"""

import pytest

from swfdeembed.validation import CHECKS, run_check


@pytest.mark.parametrize("number", sorted(CHECKS))
def test_criterion(number, capsys):
    result = run_check(number)
    with capsys.disabled():
        print("\n" + result.line())
    failed = [f"{c.label}: {c.measured}" for c in result.clauses if not c.passed]
    assert not failed, "; ".join(failed)
