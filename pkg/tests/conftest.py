import pytest

from tsblowflies import presets


@pytest.fixture(scope="session")
def ex51():
    return presets.example51()


@pytest.fixture(scope="session")
def ex51_extrema(ex51):
    return ex51.extrema


# one summary line per acceptance criterion ------------------------------------------
import re
from collections import defaultdict

_CRITERIA = defaultdict(list)
_TITLES = {
    1: "worked-example arithmetic from the printed extrema",
    2: "extrema recomputed from the coefficient formulas",
    3: "the constant varsigma",
    4: "time-scale exponential",
    5: "invariant box [A1, A2] along simulated solutions",
    6: "exponential-stability envelope",
    7: "translation algebra on Z plus one quarter",
    8: "difference-recursion oracle on Z",
    9: "RK4 observed order",
}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    m = re.search(r"::test_c(\d+)_", report.nodeid)
    if not m:
        return
    if report.when == "call" or report.failed:
        _CRITERIA[int(m.group(1))].append((report.nodeid.split("::")[-1], report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        res = _CRITERIA[k]
        ok = all(p for _, p in res)
        failed = [n for n, p in res if not p]
        line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {_TITLES.get(k, '')} ({sum(p for _, p in res)}/{len(res)} checks)"
        if failed:
            line += "  failing: " + ", ".join(failed)
        terminalreporter.write_line(line)
