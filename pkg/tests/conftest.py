import math

import mpmath
import pytest

mpmath.mp.dps = 50


def ulp_diff(a: float, b: float) -> float:
    """Distance between two doubles in units of the larger one's ulp."""
    if a == b:
        return 0.0
    return abs(a - b) / math.ulp(max(abs(a), abs(b)))


@pytest.fixture
def ulps():
    return ulp_diff


CRITERIA: dict[int, str] = {}


@pytest.fixture
def report():
    """Record the one-line verdict of an acceptance criterion."""

    def record(number: int, title: str, ok: bool, detail: str) -> None:
        line = f"criterion {number} ({title}): {'PASS' if ok else 'FAIL'} | {detail}"
        CRITERIA[number] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[number])
