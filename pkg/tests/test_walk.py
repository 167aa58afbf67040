import math
from fractions import Fraction

import numpy as np
import pytest
from conftest import complete, connected_multigraphs, cycle, path, random_connected, star
from hypothesis import given, settings
from hypothesis import strategies as st

from nearcrit.decompose import decompose_extracted_giant
from nearcrit.errors import IterationCapError, PreconditionError
from nearcrit.graph import MultiGraph
from nearcrit.rng import RngStream
from nearcrit.walk import (
    LazyWalk,
    cesaro_tmix,
    hitting_times,
    lazy_step,
    local_time_samples,
    mixing_candidates,
    point_mass,
    simulate_local_time,
    tmix_from,
    tmix_worst,
    tv_distance,
    worst_over,
)


def dense_lazy(g):
    a = g.adjacency().toarray()
    return 0.5 * np.eye(g.vertex_count) + 0.5 * a / g.degrees[:, None]


def dense_tmix(g, v, delta=0.25, cesaro=False):
    """Matrix-power oracle: row ``v`` of P^t, or the running average of P^0..P^(t-1)."""
    p = dense_lazy(g)
    pi = g.degrees / g.degrees.sum()
    row = np.eye(g.vertex_count)[v]
    total = row.copy()
    t = 0
    while True:
        cur = total / (t + 1) if cesaro else row
        if 0.5 * np.abs(cur - pi).sum() <= delta + 1e-12:
            return t + 1 if cesaro else t
        row = row @ p
        total += row
        t += 1


def test_two_vertex_examples():
    g = MultiGraph(2, [(0, 1)])
    assert np.allclose(lazy_step(g, point_mass(2, 0)), [0.5, 0.5])
    assert tmix_from(g, 0) == 1
    assert cesaro_tmix(g, 0) == 2


def test_loop_keeps_mass():
    # vertex 0 has a loop and one edge: degree 3, the move half sends 2/3 back to 0
    g = MultiGraph(2, [(0, 0), (0, 1)])
    assert np.allclose(lazy_step(g, point_mass(2, 0)), [0.5 + 0.5 * 2 / 3, 0.5 / 3])


def test_c4_two_steps_match_matrix_power():
    g = cycle(4)
    d = lazy_step(g, lazy_step(g, point_mass(4, 1)))
    assert np.allclose(d, np.linalg.matrix_power(dense_lazy(g), 2)[1])


@settings(max_examples=100, deadline=None)
@given(connected_multigraphs(max_n=9), st.data())
def test_step_conserves_mass_and_fixes_pi(g, data):
    w = data.draw(st.lists(st.floats(0, 1), min_size=g.vertex_count, max_size=g.vertex_count))
    d = np.asarray(w) + 1e-3
    d /= d.sum()
    out = lazy_step(g, d)
    assert out.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(out, d @ dense_lazy(g))
    pi = g.degrees / g.degrees.sum()
    assert np.allclose(lazy_step(g, pi), pi, atol=1e-15)


@settings(max_examples=60, deadline=None)
@given(connected_multigraphs(max_n=8))
def test_reversible_in_exact_arithmetic(g):
    a = g.adjacency().toarray().astype(int)
    two_e = int(g.degrees.sum())
    n = g.vertex_count
    for x in range(n):
        for y in range(n):
            px = Fraction(int(g.degrees[x]), two_e)
            py = Fraction(int(g.degrees[y]), two_e)
            pxy = Fraction(int(a[x, y]), 2 * int(g.degrees[x])) + (Fraction(1, 2) if x == y else 0)
            pyx = Fraction(int(a[y, x]), 2 * int(g.degrees[y])) + (Fraction(1, 2) if x == y else 0)
            assert px * pxy == py * pyx


def test_step_preconditions():
    with pytest.raises(PreconditionError):
        lazy_step(MultiGraph(2, [(0, 0)]), point_mass(2, 0))
    with pytest.raises(PreconditionError):
        lazy_step(cycle(3), np.ones(4) / 4)
    with pytest.raises(PreconditionError):
        LazyWalk(MultiGraph(0))


def test_tv_distance_examples():
    assert tv_distance([0.2, 0.8], [0.2, 0.8]) == 0
    assert tv_distance([1, 0], [0, 1]) == 1
    assert tv_distance([1, 0], [0.5, 0.5]) == 0.5
    with pytest.raises(PreconditionError):
        tv_distance([1], [0.5, 0.5])


@pytest.mark.parametrize("v", range(8))
def test_c8_matches_oracle(v):
    assert tmix_from(cycle(8), v) == dense_tmix(cycle(8), v)
    assert cesaro_tmix(cycle(8), v) == dense_tmix(cycle(8), v, cesaro=True)


def test_k5_mixes_fast():
    assert all(tmix_from(complete(5), v) <= 3 for v in range(5))


@settings(max_examples=80, deadline=None)
@given(connected_multigraphs(max_n=10), st.sampled_from([0.1, 0.25, 0.5]), st.data())
def test_mixing_times_match_oracle(g, delta, data):
    v = data.draw(st.integers(0, g.vertex_count - 1))
    assert tmix_from(g, v, delta) == dense_tmix(g, v, delta)
    assert cesaro_tmix(g, v, delta) == dense_tmix(g, v, delta, cesaro=True)


def test_batched_starts_agree_with_single_runs(rng):
    g = random_connected(rng, 60, extra=10)
    starts = np.arange(60)
    t, arg = worst_over(g, starts, batch=7)
    singles = [tmix_from(g, v) for v in starts]
    assert t == max(singles) and arg == int(np.argmax(singles))


def test_iteration_cap():
    with pytest.raises(IterationCapError):
        tmix_from(path(40), 0, cap=10)
    with pytest.raises(IterationCapError):
        cesaro_tmix(path(40), 0, cap=10)


def test_disconnected_rejected():
    with pytest.raises(PreconditionError):
        tmix_from(MultiGraph(4, [(0, 1), (2, 3)]), 0)


def test_path_argmax_is_an_endpoint():
    t, arg = tmix_worst(path(3), strategy="exhaustive")
    assert arg in (0, 2)
    assert t == max(dense_tmix(path(3), v) for v in range(3))


def test_candidates_include_tree_and_path_ends():
    # a cycle with a long pendant path: the deepest tree vertex must be a candidate
    edges = [(0, 1), (1, 2), (2, 0), (0, 3)] + [(i, i + 1) for i in range(3, 12)]
    g = MultiGraph(13, edges)
    cand = mixing_candidates(g, decompose_extracted_giant(g))
    assert 12 in cand.tolist()


def test_heuristic_between_half_and_full_exhaustive(rng):
    for _ in range(50):
        g = random_connected(rng, int(rng.integers(2, 200)), extra=int(rng.integers(0, 30)))
        d = decompose_extracted_giant(g)
        ex, _ = tmix_worst(g, strategy="exhaustive")
        he, _ = tmix_worst(g, strategy="heuristic", decomposition=d)
        assert 0.5 * ex <= he <= ex


def test_strategy_arguments():
    with pytest.raises(PreconditionError):
        tmix_worst(cycle(5), strategy="random")
    with pytest.raises(PreconditionError):
        tmix_worst(path(6000), strategy="exhaustive")


def test_hitting_times_c4():
    h = hitting_times(cycle(4), [0])
    assert h[2] == pytest.approx(8.0)
    assert hitting_times(cycle(4), [0], lazy=False)[2] == pytest.approx(4.0)
    assert np.all(hitting_times(cycle(4), range(4)) == 0)


@settings(max_examples=60, deadline=None)
@given(connected_multigraphs(max_n=10), st.data())
def test_hitting_times_match_dense_solve(g, data):
    t = data.draw(st.sets(st.integers(0, g.vertex_count - 1), min_size=1))
    for lazy in (True, False):
        p = dense_lazy(g) if lazy else g.adjacency().toarray() / g.degrees[:, None]
        free = [v for v in range(g.vertex_count) if v not in t]
        expect = np.zeros(g.vertex_count)
        if free:
            m = np.eye(len(free)) - p[np.ix_(free, free)]
            expect[free] = np.linalg.solve(m, np.ones(len(free)))
        assert np.allclose(hitting_times(g, t, lazy), expect, rtol=1e-9)


def test_hitting_times_unreachable():
    with pytest.raises(PreconditionError):
        hitting_times(MultiGraph(3, [(0, 1)]), [0])
    with pytest.raises(PreconditionError):
        hitting_times(cycle(3), [])


def test_star_hitting_time_from_leaf():
    # simple walk on a star with k leaves: centre -> fixed leaf takes 2k - 1, a leaf adds one step
    h = hitting_times(star(5), [2], lazy=False)
    assert h[0] == pytest.approx(9.0)
    assert h[1] == pytest.approx(10.0)


def test_local_time_horizon_zero():
    assert simulate_local_time(RngStream(0), cycle(5), 2, 2, 0) == 1
    assert simulate_local_time(RngStream(0), cycle(5), 1, 2, 0) == 0


def test_local_time_two_vertices():
    g = MultiGraph(2, [(0, 1)])
    horizon, runs = 1000, 10_000
    visits = local_time_samples(RngStream(42), g, 0, 0, horizon, runs)
    # oracle: sum over t of P^t(0, 0) from dense powers
    p = dense_lazy(g)
    row, expect = np.array([1.0, 0.0]), 0.0
    for _ in range(horizon + 1):
        expect += row[0]
        row = row @ p
    assert expect == pytest.approx(501.0)
    sigma = visits.std(ddof=1) / math.sqrt(runs)
    assert abs(visits.mean() - expect) <= 3 * sigma


def test_local_time_matches_dense_expectation_on_path():
    g = path(4)
    horizon, runs = 30, 20_000
    visits = local_time_samples(RngStream(7), g, 0, 3, horizon, runs)
    p = dense_lazy(g)
    row, expect = np.eye(4)[0], 0.0
    for _ in range(horizon + 1):
        expect += row[3]
        row = row @ p
    assert abs(visits.mean() - expect) <= 4 * visits.std(ddof=1) / math.sqrt(runs)
