import re

import pytest

_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_KEY] = {}


@pytest.fixture
def criterion(request, capsys):
    """Record one PASS/FAIL line for an acceptance criterion and return ``ok``."""

    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        request.config.stash[_KEY][number] = line
        with capsys.disabled():
            print("\n" + line)
        return ok

    return record


def pytest_runtest_logreport(report):
    # a criterion that crashed before reporting still gets its FAIL line
    match = re.search(r"test_criterion_(\d+)_", report.nodeid)
    if match and report.when == "call" and report.failed:
        lines = report.config.stash[_KEY] if hasattr(report, "config") else None
        if lines is not None and int(match.group(1)) not in lines:
            lines[int(match.group(1))] = f"FAIL criterion {match.group(1)}: {report.longrepr.reprcrash.message}"


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    outcome.get_result().config = item.config


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash[_KEY]
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])
