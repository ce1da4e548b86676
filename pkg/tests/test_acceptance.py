"""The ten acceptance criteria, each at its stated tolerance.

Each test prints one PASS/FAIL line (visible with ``pytest -s`` or in the
terminal summary via ``-rA``).  Criterion 10 runs the full report twice in
subprocesses and takes a few minutes.
"""

import pytest

from rscc import acceptance


@pytest.fixture(scope="module")
def ctx():
    return acceptance.Context()


@pytest.mark.parametrize("check", acceptance.CRITERIA, ids=lambda fn: fn.__name__)
def test_criterion(check, ctx):
    res = check(ctx)
    print(res.line())
    assert res.passed, res.line()
