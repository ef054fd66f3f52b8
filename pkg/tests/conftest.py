import re
import sys
from pathlib import Path

from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

sys.path.insert(0, str(Path(__file__).resolve().parent))

_RESULTS = {}
_PATTERN = re.compile(r"test_acceptance\.py::test_criterion_(\d+)$")


def pytest_runtest_logreport(report):
    m = _PATTERN.search(report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    if report.when == "call" or report.failed:
        prev = _RESULTS.get(n, True)
        _RESULTS[n] = prev and report.passed


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    from test_acceptance import TITLES

    terminalreporter.section("acceptance criteria")
    for n in sorted(TITLES):
        if n not in _RESULTS:
            state = "NOT RUN"
        else:
            state = "PASS" if _RESULTS[n] else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}: {state:7} {TITLES[n]}")
