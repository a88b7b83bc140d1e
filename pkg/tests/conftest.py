"""Collect acceptance outcomes and print one PASS/FAIL line per criterion at the end of the run."""

from __future__ import annotations

import re

import pytest

_CRITERION = re.compile(r"test_criterion_(\d+)_(\w+)")
_OUTCOMES: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    m = _CRITERION.fullmatch(item.name)
    if m is None:
        return
    number, label = int(m.group(1)), m.group(2).replace("_", " ")
    if report.failed:
        _OUTCOMES[number] = ("FAIL", label)
    elif report.when == "call" and number not in _OUTCOMES:
        _OUTCOMES[number] = ("PASS" if report.passed else "SKIP", label)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        status, label = _OUTCOMES[number]
        terminalreporter.write_line(f"{status} criterion {number}: {label}")
