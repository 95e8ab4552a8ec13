"""Collects acceptance-criterion outcomes and prints one line per criterion."""

from __future__ import annotations

import pytest

_OUTCOMES: dict[int, tuple[str, bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    failed = report.failed or (report.when == "call" and report.skipped)
    prev = _OUTCOMES.get(number, (title, True))[1]
    if report.when == "call" or failed:
        _OUTCOMES[number] = (title, prev and not failed)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        title, ok = _OUTCOMES[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {number:2d}: {title}")
