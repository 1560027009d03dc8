import pytest

from heatlab import acceptance

# one line per acceptance criterion, printed after the run
REPORT_LINES = []


@pytest.fixture(scope="session")
def eng():
    """Shared immutable engines keyed by space tag."""
    return acceptance.engine


@pytest.fixture(scope="session")
def report_lines():
    return REPORT_LINES


def pytest_terminal_summary(terminalreporter):
    if REPORT_LINES:
        terminalreporter.section("acceptance criteria")
        for line in REPORT_LINES:
            terminalreporter.write_line(line)
