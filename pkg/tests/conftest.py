import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from robotcrawler.graph import Graph, PartiteSpec

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def connected_graphs(draw, min_n=2, max_n=9):
    """Random spanning tree plus random extra edges."""
    n = draw(st.integers(min_n, max_n))
    edges = set()
    for v in range(1, n):
        u = draw(st.integers(0, v - 1))
        edges.add((u, v))
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=2 * n))
    for u, v in extra:
        if u != v:
            edges.add((min(u, v), max(u, v)))
    return Graph.from_edges(n, sorted(edges))


@st.composite
def partite_specs(draw, min_k=2, max_k=5, max_size=6):
    k = draw(st.integers(min_k, max_k))
    return PartiteSpec(tuple(draw(st.lists(st.integers(1, max_size), min_size=k, max_size=k))))


@st.composite
def weightings_for(draw, n):
    perm = draw(st.permutations(list(range(n))))
    return np.array(perm, dtype=np.int64) - n


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict(request):
    """Record and echo one PASS/FAIL line for an acceptance criterion."""
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")

    def emit(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        if reporter is not None:
            reporter.write_line("")
            reporter.write_line(line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
