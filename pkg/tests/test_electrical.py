import numpy as np
import pytest
from conftest import complete, connected_multigraphs, cycle, path, random_connected, star
from hypothesis import given, settings
from hypothesis import strategies as st

from nearcrit import electrical
from nearcrit.electrical import (
    commute_time_check,
    effective_resistance,
    escape_probability,
    lazy_commute_time,
    solve_grounded,
    voltage_hitting,
    voltages,
)
from nearcrit.errors import PreconditionError
from nearcrit.graph import MultiGraph
from nearcrit.walk import hitting_times


def pinv_resistance(g, a, b):
    """Oracle: R_eff = (e_a - e_b)^T L^+ (e_a - e_b) with a dense pseudo-inverse."""
    lp = np.linalg.pinv(g.laplacian().toarray())
    x = np.zeros(g.vertex_count)
    x[a], x[b] = 1, -1
    return float(x @ lp @ x)


@pytest.mark.parametrize("length", [1, 2, 5, 17])
def test_series_law(length):
    assert effective_resistance(path(length + 1), 0, length) == pytest.approx(length)


@pytest.mark.parametrize("n", [3, 4, 9, 30])
def test_parallel_law_on_cycle(n):
    assert effective_resistance(cycle(n), 0, 1) == pytest.approx((n - 1) / n)


def test_k4_and_parallel_edges_and_loops():
    assert effective_resistance(complete(4), 1, 3) == pytest.approx(0.5)
    assert effective_resistance(MultiGraph(2, [(0, 1)] * 4), 0, 1) == pytest.approx(0.25)
    # a loop carries no current
    assert effective_resistance(MultiGraph(2, [(0, 1), (0, 0), (1, 1)]), 0, 1) == pytest.approx(1.0)


def test_resistance_errors():
    with pytest.raises(PreconditionError):
        effective_resistance(cycle(4), 2, 2)
    with pytest.raises(PreconditionError):
        effective_resistance(MultiGraph(4, [(0, 1), (2, 3)]), 0, 3)


@settings(max_examples=80, deadline=None)
@given(connected_multigraphs(max_n=12), st.data())
def test_resistance_matches_pseudoinverse(g, data):
    a = data.draw(st.integers(0, g.vertex_count - 1))
    b = data.draw(st.integers(0, g.vertex_count - 1).filter(lambda x: x != a))
    assert effective_resistance(g, a, b) == pytest.approx(pinv_resistance(g, a, b), rel=1e-8)


@settings(max_examples=60, deadline=None)
@given(connected_multigraphs(max_n=10), st.data())
def test_rayleigh_monotonicity(g, data):
    a = data.draw(st.integers(0, g.vertex_count - 1))
    b = data.draw(st.integers(0, g.vertex_count - 1).filter(lambda x: x != a))
    u = data.draw(st.integers(0, g.vertex_count - 1))
    v = data.draw(st.integers(0, g.vertex_count - 1))
    bigger = MultiGraph(g.vertex_count, np.vstack([g.edges, [[u, v]]]))
    assert effective_resistance(bigger, a, b) <= effective_resistance(g, a, b) + 1e-12


def test_resistance_is_a_metric(rng):
    g = random_connected(rng, 12, extra=6)
    r = np.array([[0 if i == j else effective_resistance(g, i, j) for j in range(12)] for i in range(12)])
    assert np.allclose(r, r.T)
    for k in range(12):
        assert np.all(r <= r[:, [k]] + r[[k], :] + 1e-12)


def test_escape_probability_examples():
    assert escape_probability(path(3), 1, [0, 2]) == pytest.approx(1.0)
    for length in (1, 3, 8):
        assert escape_probability(path(length + 1), 0, [length]) == pytest.approx(1 / length)
    with pytest.raises(PreconditionError):
        escape_probability(path(3), 1, [1])
    with pytest.raises(PreconditionError):
        escape_probability(path(3), 1, [])


@settings(max_examples=100, deadline=None)
@given(connected_multigraphs(min_n=3, max_n=12), st.data())
def test_escape_probability_routes_agree(g, data):
    v = data.draw(st.integers(0, g.vertex_count - 1))
    targets = data.draw(st.sets(st.integers(0, g.vertex_count - 1).filter(lambda x: x != v), min_size=1))
    p = escape_probability(g, v, targets)  # raises if the two routes differ by > 1e-9
    assert 0 < p <= 1


def test_escape_probability_single_target_matches_resistance(rng):
    g = random_connected(rng, 10, extra=5)
    p = escape_probability(g, 0, [7])
    assert p == pytest.approx(1 / (g.degrees[0] * effective_resistance(g, 0, 7)))


def test_star_voltage_hitting():
    g = star(6)
    assert voltage_hitting(g, 0, [3]) == pytest.approx(hitting_times(g, [3], lazy=False)[0])
    v = voltages(g, 0, [3])
    assert v[3] == 0 and v[0] == pytest.approx(1.0)


@settings(max_examples=100, deadline=None)
@given(connected_multigraphs(min_n=2, max_n=12), st.data())
def test_voltage_hitting_identity(g, data):
    z = data.draw(st.integers(0, g.vertex_count - 1))
    targets = data.draw(st.sets(st.integers(0, g.vertex_count - 1).filter(lambda x: x != z), min_size=1))
    direct = hitting_times(g, targets, lazy=False)[z]
    assert voltage_hitting(g, z, targets) == pytest.approx(direct, rel=1e-8)


@settings(max_examples=100, deadline=None)
@given(connected_multigraphs(min_n=2, max_n=12), st.data())
def test_commute_time_identity(g, data):
    v = data.draw(st.integers(0, g.vertex_count - 1))
    w = data.draw(st.integers(0, g.vertex_count - 1).filter(lambda x: x != v))
    commute, electric = commute_time_check(g, v, w)
    assert commute == pytest.approx(electric, rel=1e-8)
    assert lazy_commute_time(g, v, w) == pytest.approx(2 * commute, rel=1e-8)


def test_commute_on_component_only():
    g = MultiGraph(5, [(0, 1), (1, 2), (3, 4)])
    commute, electric = commute_time_check(g, 0, 2)
    assert commute == pytest.approx(8.0) and electric == pytest.approx(8.0)
    with pytest.raises(PreconditionError):
        commute_time_check(g, 0, 4)


def test_iterative_solver_matches_dense(monkeypatch, rng):
    g = random_connected(rng, 80, extra=40)
    dense = effective_resistance(g, 3, 61)
    monkeypatch.setattr(electrical, "DENSE_LIMIT", 10)
    assert effective_resistance(g, 3, 61) == pytest.approx(dense, rel=1e-9)


def test_solve_grounded_all_grounded():
    g = cycle(3)
    x = solve_grounded(g.laplacian(), np.ones(3, dtype=bool), np.ones(3))
    assert np.all(x == 0)
