"""Lazy random walk: exact law evolution, TV and Cesaro mixing times, hitting and local times.

Laws are dense numpy vectors (or ``n x k`` matrices, one column per start) over the
vertices of a connected graph.  One lazy step keeps half the mass in place and spreads
the other half along incidences, so a loop at ``x`` sends ``2/deg(x)`` of the moving
half back to ``x``.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .errors import IterationCapError, PreconditionError
from .graph import MultiGraph, bfs_distances, component_labels, vertex_set

DEFAULT_DELTA = 0.25
STEP_CAP = 10 ** 8
RENORM_TOL = 1e-12
# batched laws are checked for drift every this many steps
RENORM_EVERY = 64
# TV distance from a fixed start is nonincreasing, so it is only tested every few steps
TV_STRIDE = 8
# slack when comparing a computed TV distance against delta
TV_TOL = 1e-12
EXHAUSTIVE_LIMIT = 5000


class LazyWalk:
    """Cached lazy-walk operator for one graph."""

    def __init__(self, g: MultiGraph):
        if g.vertex_count == 0:
            raise PreconditionError("empty graph")
        if np.any(g.degrees == 0):
            raise PreconditionError("lazy walk undefined at a vertex of degree 0")
        self.g = g
        self.adj = g.adjacency()
        self.inv_deg = 1.0 / g.degrees.astype(np.float64)
        self.pi = g.degrees / float(g.degrees.sum())
        # column-stochastic operator acting on laws: d -> d/2 + A D^-1 d / 2
        self._op = sp.csr_matrix(0.5 * sp.identity(g.vertex_count) + 0.5 * (self.adj @ sp.diags(self.inv_deg)))
        self._since_check = 0

    def step(self, d: np.ndarray) -> np.ndarray:
        out = self._op @ d
        self._since_check += 1
        if self._since_check >= RENORM_EVERY or d.ndim == 1:
            self._since_check = 0
            total = out.sum(axis=0)
            if np.any(np.abs(total - 1.0) > RENORM_TOL):
                out = out / total
        return out

    def tv_to_pi(self, d: np.ndarray) -> np.ndarray:
        ref = self.pi if d.ndim == 1 else self.pi[:, None]
        return 0.5 * np.abs(d - ref).sum(axis=0)

    def transition_matrix(self, lazy: bool = True) -> sp.csr_matrix:
        p = sp.diags(self.inv_deg) @ self.adj
        if lazy:
            p = 0.5 * sp.identity(self.g.vertex_count) + 0.5 * p
        return sp.csr_matrix(p)


def point_mass(n: int, v: int) -> np.ndarray:
    d = np.zeros(n)
    d[v] = 1.0
    return d


def lazy_step(g: MultiGraph, d: np.ndarray) -> np.ndarray:
    """``d'(y) = d(y)/2 + sum_{x~y} d(x) / (2 deg(x))`` with multiplicities."""
    d = np.asarray(d, dtype=np.float64)
    if d.shape[0] != g.vertex_count or np.any(d < 0):
        raise PreconditionError("distribution does not match the graph")
    return LazyWalk(g).step(d)


def tv_distance(a, b) -> float:
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise PreconditionError("distributions over different supports")
    return float(0.5 * np.abs(a - b).sum())


def _require_connected(g):
    _, sizes = component_labels(g)
    if len(sizes) != 1:
        raise PreconditionError("the walk needs a connected graph")


def _mixing_times(walk: LazyWalk, starts, delta: float, cesaro: bool, cap: int) -> np.ndarray:
    """First passage below ``delta`` for each start, all starts advanced together.

    ``t -> TV(P^t(v, .), pi)`` is nonincreasing, so the plain run tests only every
    ``TV_STRIDE`` steps and replays the last stride for starts that crossed.  The Cesaro
    average has no such monotonicity and is tested at every step.
    """
    starts = np.asarray(starts, dtype=np.int64)
    n, k = walk.g.vertex_count, len(starts)
    result = np.full(k, -1, dtype=np.int64)
    live = np.arange(k)
    law = np.zeros((n, k))
    law[starts, live] = 1.0
    if cesaro:
        total = law.copy()
        t = 1
        while live.size:
            hit = walk.tv_to_pi(total / t) <= delta + TV_TOL
            if hit.any():
                result[live[hit]] = t
                keep = ~hit
                live, law, total = live[keep], law[:, keep], total[:, keep]
                if not live.size:
                    break
            if t >= cap:
                raise IterationCapError(f"not mixed after {cap} steps")
            law = walk.step(law)
            total += law
            t += 1
        return result
    t = 0
    snap, snap_t = law, 0
    while live.size:
        hit = walk.tv_to_pi(law) <= delta + TV_TOL
        if hit.any():
            replay, r = snap[:, hit], snap_t
            pending = live[hit]
            while pending.size:
                done = walk.tv_to_pi(replay) <= delta + TV_TOL
                result[pending[done]] = r
                pending, replay = pending[~done], replay[:, ~done]
                if pending.size:
                    replay = walk.step(replay)
                    r += 1
            keep = ~hit
            live, law = live[keep], law[:, keep]
            if not live.size:
                break
        if t >= cap:
            raise IterationCapError(f"not mixed after {cap} steps")
        snap, snap_t = law, t
        for _ in range(min(TV_STRIDE, cap - t)):
            law = walk.step(law)
            t += 1
    return result


def tmix_from(g: MultiGraph, v: int, delta: float = DEFAULT_DELTA, cap: int = STEP_CAP) -> int:
    """Least ``t`` with ``TV(P_v(S_t), pi) <= delta``."""
    _require_connected(g)
    vertex_set(g, [v])
    return int(_mixing_times(LazyWalk(g), [v], delta, False, cap)[0])


def cesaro_tmix(g: MultiGraph, v: int, delta: float = DEFAULT_DELTA, cap: int = STEP_CAP) -> int:
    """Least ``t`` with ``TV((1/t) sum_{i<t} P_v(S_i), pi) <= delta``."""
    _require_connected(g)
    vertex_set(g, [v])
    return int(_mixing_times(LazyWalk(g), [v], delta, True, cap)[0])


def mixing_candidates(g: MultiGraph, decomposition=None) -> np.ndarray:
    """Worst-start candidates: double-sweep ends, the deepest attached-tree vertex, and
    the two ends of the longest 2-path (the last two need a decomposition)."""
    d0 = bfs_distances(g, 0)
    a = int(np.argmax(d0))
    b = int(np.argmax(bfs_distances(g, a)))
    cand = [a, b]
    if decomposition is not None and not decomposition.trivial:
        depth = decomposition.tree_depths()
        if depth.max() > 0:
            cand.append(int(np.argmax(depth)))
        if decomposition.paths:
            e = int(np.argmax(decomposition.path_lengths))
            path = decomposition.paths[e]
            cand += [int(decomposition.core_ids[path[0]]), int(decomposition.core_ids[path[-1]])]
    return np.unique(cand)


def worst_over(g: MultiGraph, starts, delta: float = DEFAULT_DELTA, cesaro: bool = False,
               cap: int = STEP_CAP, batch: int = 64) -> tuple[int, int]:
    """Max mixing time over ``starts``; returns ``(t, argmax start)`` (smallest id on ties)."""
    _require_connected(g)
    walk = LazyWalk(g)
    starts = np.unique(np.asarray(starts, dtype=np.int64))
    times = np.concatenate([
        _mixing_times(walk, starts[i:i + batch], delta, cesaro, cap) for i in range(0, len(starts), batch)
    ])
    i = int(np.argmax(times))
    return int(times[i]), int(starts[i])


def tmix_worst(g: MultiGraph, delta: float = DEFAULT_DELTA, strategy: str = "heuristic",
               decomposition=None, cap: int = STEP_CAP) -> tuple[int, int]:
    """Worst-start TV mixing time.

    ``exhaustive`` scans every start (at most 5000 vertices) and is exact; ``heuristic``
    scans :func:`mixing_candidates` only and is a lower bound on the exact value.
    """
    if strategy == "exhaustive":
        if g.vertex_count > EXHAUSTIVE_LIMIT:
            raise PreconditionError(f"exhaustive strategy limited to {EXHAUSTIVE_LIMIT} vertices")
        starts = np.arange(g.vertex_count)
    elif strategy == "heuristic":
        starts = mixing_candidates(g, decomposition)
    else:
        raise PreconditionError(f"unknown strategy {strategy!r}")
    return worst_over(g, starts, delta, cesaro=False, cap=cap)


def hitting_times(g: MultiGraph, targets, lazy: bool = True) -> np.ndarray:
    """Expected hitting time of ``targets`` from every vertex.

    Solves ``h = 0`` on targets, ``h = 1 + P h`` elsewhere (``P`` lazy or simple) as a
    sparse direct system, and checks the residual.
    """
    tset = vertex_set(g, targets)
    if tset.size == 0:
        raise PreconditionError("targets must be nonempty")
    labels, _ = component_labels(g)
    if not np.all(np.isin(labels, labels[tset])):
        raise PreconditionError("some vertices cannot reach the targets")
    n = g.vertex_count
    h = np.zeros(n)
    free = np.ones(n, dtype=bool)
    free[tset] = False
    if not free.any():
        return h
    p = LazyWalk(g).transition_matrix(lazy)
    idx = np.flatnonzero(free)
    puu = p[idx][:, idx]
    m = sp.identity(len(idx), format="csc") - puu.tocsc()
    sol = np.atleast_1d(spsolve(m, np.ones(len(idx))))
    resid = np.abs(sol - 1.0 - puu @ sol).max()
    if not np.isfinite(resid) or resid > 1e-10 * max(1.0, float(np.abs(sol).max())):
        raise PreconditionError(f"hitting-time system is singular or ill-conditioned (residual {resid:.3g})")
    h[idx] = sol
    return h


def local_time_samples(stream, g: MultiGraph, start: int, v: int, horizon: int, trajectories: int) -> np.ndarray:
    """Visit counts ``#{0 <= t <= horizon : S_t = v}`` over independent trajectories."""
    if horizon < 0:
        raise PreconditionError("horizon must be nonnegative")
    vertex_set(g, [start, v])
    if np.any(g.degrees == 0):
        raise PreconditionError("walk undefined at a vertex of degree 0")
    gen = stream.gen
    pos = np.full(trajectories, start, dtype=np.int64)
    visits = (pos == v).astype(np.int64)
    deg, ptr, nbr = g.degrees, g.indptr, g.nbr
    for _ in range(horizon):
        move = gen.random(trajectories) < 0.5
        mv = pos[move]
        slot = ptr[mv] + (gen.random(mv.size) * deg[mv]).astype(np.int64)
        pos[move] = nbr[slot]
        visits += pos == v
    return visits


def simulate_local_time(stream, g: MultiGraph, start: int, v: int, horizon: int) -> int:
    return int(local_time_samples(stream, g, start, v, horizon, 1)[0])
