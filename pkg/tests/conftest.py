import csv
from datetime import date

import pytest

from rotorkit.panel import fixture_text, load_fixture


@pytest.fixture(scope="session")
def table2():
    return load_fixture()


@pytest.fixture(scope="session")
def table2_rows():
    """Raw fixture rows as text, parsed with nothing but the csv module."""
    return list(csv.reader(fixture_text().splitlines()))[1:]


def d(text):
    return date.fromisoformat(text)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
