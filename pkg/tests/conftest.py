import itertools

import numpy as np
import pytest
from hypothesis import strategies as st

from nearcrit.graph import MultiGraph, component_labels
from nearcrit.models import build_c1tilde
from nearcrit.rng import ModelParams, RngStream


def cycle(n):
    return MultiGraph(n, [(i, (i + 1) % n) for i in range(n)])


def path(n):
    return MultiGraph(n, [(i, i + 1) for i in range(n - 1)])


def complete(n):
    return MultiGraph(n, list(itertools.combinations(range(n), 2)))


def star(leaves):
    return MultiGraph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def is_connected(g):
    return g.vertex_count > 0 and len(component_labels(g)[1]) == 1


def random_connected(rng, n, extra=None, loops=True, multi=True):
    """Random spanning tree plus extra edges (loops and parallel edges allowed)."""
    edges = [(int(rng.integers(i)), i) for i in range(1, n)]
    for _ in range(int(rng.integers(0, n + 2)) if extra is None else extra):
        u, v = (int(x) for x in rng.integers(n, size=2))
        if u == v and not loops:
            continue
        if not multi and (min(u, v), max(u, v)) in {(min(a, b), max(a, b)) for a, b in edges}:
            continue
        edges.append((u, v))
    perm = rng.permutation(n)
    return MultiGraph(n, [(int(perm[u]), int(perm[v])) for u, v in edges])


@st.composite
def multigraphs(draw, min_n=1, max_n=10, max_m=20):
    n = draw(st.integers(min_n, max_n))
    vert = st.integers(0, n - 1)
    edges = draw(st.lists(st.tuples(vert, vert), max_size=max_m))
    return MultiGraph(n, edges)


@st.composite
def connected_multigraphs(draw, min_n=2, max_n=10, max_extra=10):
    n = draw(st.integers(min_n, max_n))
    tree = [(draw(st.integers(0, i - 1)), i) for i in range(1, n)]
    vert = st.integers(0, n - 1)
    extra = draw(st.lists(st.tuples(vert, vert), max_size=max_extra))
    return MultiGraph(n, tree + extra)


@pytest.fixture(scope="session")
def c1_replicates():
    """Ten draws of the contiguous model at n = 10^6, eps = 0.1 (lambda = 1000)."""
    params = ModelParams(10 ** 6, 0.1)
    return [build_c1tilde(RngStream(2024, r), params) for r in range(10)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_CRITERIA = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_CRITERIA] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(cid, ok, detail)`` returns ``ok``."""

    def record(cid, ok, detail):
        request.config.stash[_CRITERIA].append((cid, bool(ok), detail))
        print(f"{cid} {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    rows = config.stash.get(_CRITERIA, [])
    if rows:
        terminalreporter.section("acceptance criteria")
        for cid, ok, detail in sorted(rows, key=lambda r: int(r[0][1:])):
            terminalreporter.write_line(f"{cid:>4} {'PASS' if ok else 'FAIL'}  {detail}")
