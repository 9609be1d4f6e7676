"""Shared pytest plumbing: the acceptance-criteria summary block.

Tests marked with @pytest.mark.criterion("...") get one PASS/FAIL line
each at the end of the run, so the acceptance status is readable without
digging through the full report.
"""

import pytest

_RESULTS = []


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(label): acceptance criterion reported in the terminal summary"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    label = mark.args[0]
    if report.when == "call":
        _RESULTS.append((label, report.passed))
    elif report.when == "setup" and not report.passed:
        # A broken fixture (e.g. the training run crashed) still counts
        # as a failed criterion, not a silent gap in the summary.
        _RESULTS.append((label, False))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _RESULTS:
        return
    seen = {}
    order = []
    for label, ok in _RESULTS:
        if label not in seen:
            order.append(label)
            seen[label] = ok
        else:
            seen[label] = seen[label] and ok
    terminalreporter.section("acceptance criteria")
    for label in order:
        terminalreporter.write_line(("PASS " if seen[label] else "FAIL ") + label)
