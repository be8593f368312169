import pytest

from twisted_delta.characters import parse_character
from twisted_delta.sieve import build_sieve


@pytest.fixture(scope="session")
def sieve_small():
    return build_sieve(100_000)


@pytest.fixture(scope="session")
def chi3():
    return parse_character("3:1")


@pytest.fixture(scope="session")
def chi5():
    return parse_character("5:1")


@pytest.fixture(scope="session")
def chi7():
    return parse_character("7:1")


@pytest.fixture(scope="session")
def ones():
    return parse_character("1:0")


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
