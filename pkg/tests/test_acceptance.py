"""Acceptance criteria 1-9, each at its stated tolerance.

Every test prints one ``[PASS]``/``[FAIL]`` line; the lines are repeated in
the pytest terminal summary.  Run as a script for the same report without
pytest.
"""

import pytest

from heatlab import acceptance
from heatlab.acceptance import CRITERIA, criterion_9, run_criterion, threads

# CSV of each criterion at one thread, reused as the reference for criterion 9
_CSV = {}


def _report(cr, report_lines):
    line = cr.line()
    print(line)
    report_lines.append(line)
    detail = "; ".join(f"{c.name}={c.value!r} ({c.threshold})" for c in cr.failures())
    assert cr.passed, f"criterion {cr.number} failed: {detail}"


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, report_lines):
    with threads(1):
        cr = run_criterion(number)
    _CSV[number] = cr.to_csv()
    _report(cr, report_lines)


def test_criterion_9_determinism(report_lines):
    cr = criterion_9(tuple(CRITERIA), reference=dict(_CSV))
    _report(cr, report_lines)


if __name__ == "__main__":
    import sys
    results = acceptance.run_suite("all")
    sys.exit(0 if all(r.passed for r in results) else 1)
