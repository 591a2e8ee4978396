"""Collects acceptance-criterion verdicts and prints them after the run."""

import pytest

_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_KEY] = []


@pytest.fixture
def verdict(request):
    """Call ``verdict(number, passed, detail)``; the line is echoed now and in the summary."""
    lines = request.config.stash[_KEY]

    def record(number, passed: bool, detail: str) -> bool:
        line = f"CRITERION {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_KEY, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=lambda s: _order(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)


def _order(tag: str):
    num = "".join(ch for ch in tag if ch.isdigit())
    return (int(num) if num else 0, tag)
