"""The twelve acceptance criteria, run once through ``benchmark --selftest``."""

import pytest

from conftest import record_line

CRITERIA = range(1, 13)


@pytest.fixture(scope="module")
def results(selftest_report):
    return {c["number"]: c for c in selftest_report["criteria"]}


@pytest.mark.parametrize("number", CRITERIA)
def test_criterion(results, number):
    res = results[number]
    status = "PASS" if res["passed"] else "FAIL"
    line = f"[{status}] criterion {number:2d} {res['title']}: {res['detail']} ({res['seconds']:.1f} s)"
    print(line)
    record_line(line)
    assert res["passed"], line


def test_selftest_lines_and_exit_code(selftest_report):
    lines = [l for l in selftest_report["stdout"].splitlines() if l.startswith("[")]
    assert len(lines) == 12
    all_pass = all(c["passed"] for c in selftest_report["criteria"])
    assert selftest_report["exit_code"] == (0 if all_pass else 2)
