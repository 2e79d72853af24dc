import pytest

from mnemosim.netcore import Condition, build_experiment_network

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def weak_net():
    return build_experiment_network(Condition.WEAK_TIES_FIRST)


@pytest.fixture(scope="session")
def strong_net():
    return build_experiment_network(Condition.STRONG_TIES_FIRST)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
