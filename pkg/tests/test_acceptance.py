"""Acceptance criteria, one check each, at full size.

Run directly (``python3 tests/test_acceptance.py``) or under pytest; either
way one PASS/FAIL line per criterion is printed.
"""
import json
import sys
import time

import pytest

from learnlab.verify import verify

SEED = 20240601

CRITERIA = [
    (1, "halving"),
    (2, "dp-bruteforce"),
    (3, "lower-1/8"),
    (4, "erm-upper"),
    (5, "reductions"),
    (6, "preq-decomp"),
    (7, "bijection"),
    (8, "dims-order"),
    (9, "random-level"),
    (10, "mixture"),
    (11, "regression-lower"),
    (12, "umlln"),
]

RESULTS: dict = {}


def summary_line(num: int, suite: str, report, seconds: float) -> str:
    check = report.checks[0]
    status = "PASS" if report.passed else "FAIL"
    measured = json.dumps(check.measured, sort_keys=True, default=str)
    if len(measured) > 400:
        measured = measured[:397] + "..."
    return f"criterion {num:2d} [{suite}] {status} ({seconds:.1f}s) {check.name}: {measured}"


def run_criterion(num: int, suite: str):
    t0 = time.perf_counter()
    report = verify(suite, SEED)
    line = summary_line(num, suite, report, time.perf_counter() - t0)
    RESULTS[num] = line
    print(line)
    return report


@pytest.mark.slow
@pytest.mark.parametrize("num,suite", CRITERIA, ids=[f"c{n:02d}-{s}" for n, s in CRITERIA])
def test_criterion(num, suite):
    report = run_criterion(num, suite)
    assert report.passed, RESULTS[num]


if __name__ == "__main__":
    ok = True
    for num, suite in CRITERIA:
        ok &= run_criterion(num, suite).passed
    sys.exit(0 if ok else 1)
