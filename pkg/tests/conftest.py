import pytest
from hypothesis import settings

from fbm_link.graph import Graph, load_bundled, parse_edge_list

settings.register_profile("fbm", deadline=None)
settings.load_profile("fbm")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def karate() -> Graph:
    return load_bundled("karate")


@pytest.fixture
def triangle() -> Graph:
    return parse_edge_list("1 2\n2 3\n3 1\n")


@pytest.fixture
def path4() -> Graph:
    return parse_edge_list("1 2\n2 3\n3 4\n")


def make_graph(n: int, edges) -> Graph:
    return Graph([str(i) for i in range(n)], edges)
