"""The fifteen acceptance criteria at their stated tolerances.

Run with ``pytest -s tests/test_acceptance.py`` to see one line per criterion.
"""

import pytest

from kron_trace.acceptance import CRITERIA, run

_results = {}


@pytest.mark.parametrize("check", CRITERIA, ids=[c.__name__ for c in CRITERIA])
def test_criterion(check):
    result = run(check)
    _results[result.number] = result
    print("\n" + result.line())
    assert result.passed, result.line()


def test_summary():
    for check in CRITERIA:
        number = int(check.__name__[1:3])
        if number not in _results:
            _results[number] = run(check)
    lines = [_results[k].line() for k in sorted(_results)]
    print("\n" + "\n".join(lines))
    print(f"{sum(r.passed for r in _results.values())}/{len(CRITERIA)} criteria pass")
    assert len(_results) == len(CRITERIA)
