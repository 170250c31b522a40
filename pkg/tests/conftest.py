import networkx as nx
import pytest
from hypothesis import HealthCheck, settings

from faultoracle.graph_core import Graph

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def from_nx(h, n=None) -> Graph:
    n = h.number_of_nodes() if n is None else n
    return Graph(n, sorted((min(u, v), max(u, v)) for u, v in h.edges()))


@pytest.fixture
def star9():
    return from_nx(nx.star_graph(9))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
