import pytest

from gatesimp import complete_graph, cycle_graph, path_graph, star_graph

ACCEPTANCE_LINES = []


@pytest.fixture
def p5():
    return path_graph(5)


@pytest.fixture
def c6():
    return cycle_graph(6)


@pytest.fixture
def k3():
    return complete_graph(3)


@pytest.fixture
def star6():
    return star_graph(6)


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
