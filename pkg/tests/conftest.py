import pytest

from monoseq import GridSpec, build_value_table, build_variance_table


@pytest.fixture(scope="session")
def table3():
    return build_value_table(3)


@pytest.fixture(scope="session")
def table100():
    return build_value_table(100)


@pytest.fixture(scope="session")
def var100(table100):
    return build_variance_table(table100)


@pytest.fixture(scope="session")
def table50_coarse():
    return build_value_table(50, GridSpec(1025))


@pytest.fixture(scope="session")
def var50_coarse(table50_coarse):
    return build_variance_table(table50_coarse)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
