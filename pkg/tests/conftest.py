"""Prints one summary line per acceptance criterion after the run."""

import re

ACCEPTANCE_PATTERN = re.compile(r"test_acceptance_(\d+)")
_results = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    m = ACCEPTANCE_PATTERN.search(report.nodeid)
    if not m:
        return
    num = int(m.group(1))
    _results[num] = report.outcome == "passed" and _results.get(num, True)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_results):
        verdict = "PASS" if _results[num] else "FAIL"
        terminalreporter.write_line(f"ACCEPTANCE {num}: {verdict}")
