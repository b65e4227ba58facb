import pytest

from vargame.game import build_tables
from vargame.scenarios import bundled


@pytest.fixture(scope="session")
def two():
    return bundled("two_customer")


@pytest.fixture(scope="session")
def two_tables(two):
    return build_tables(two)


@pytest.fixture(scope="session")
def three():
    return bundled("three_customer")


@pytest.fixture(scope="session")
def seven():
    return bundled("seven_customer")


# Acceptance outcomes, collected by tests/test_acceptance.py and printed at the end
# of the run so they survive output capture.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
