from contextlib import contextmanager

import pytest

_acceptance_lines: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""
    @contextmanager
    def check(number: int, title: str):
        try:
            yield
        except BaseException:
            _acceptance_lines.append(f"FAIL criterion {number}: {title}")
            raise
        _acceptance_lines.append(f"PASS criterion {number}: {title}")
    return check


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_acceptance_lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
