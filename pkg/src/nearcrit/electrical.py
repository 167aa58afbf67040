"""Unit-resistor network computations: effective resistance, escape probabilities,
voltage form of hitting times, and the commute-time identity.

Loops carry no current, so they vanish from the Laplacian, but they still count in
vertex degrees (they are walk steps that go nowhere).  Reduced Laplacian systems are
solved densely below ``DENSE_LIMIT`` unknowns and by Jacobi-preconditioned conjugate
gradients above it.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg, spsolve

from .errors import PreconditionError
from .graph import MultiGraph, bfs_distances, induced_subgraph, vertex_set
from .walk import LazyWalk, hitting_times

DENSE_LIMIT = 500
CG_RTOL = 1e-12


def solve_grounded(lap: sp.csr_matrix, grounded: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``L_UU x_U = rhs_U`` with ``x = 0`` on the grounded vertices.

    ``L`` must be a Laplacian in which every ungrounded vertex connects to a grounded one.
    """
    free = np.flatnonzero(~grounded)
    x = np.zeros(lap.shape[0])
    if free.size == 0:
        return x
    luu = lap[free][:, free]
    b = rhs[free]
    if free.size < DENSE_LIMIT:
        x[free] = sla.solve(luu.toarray(), b, assume_a="pos")
        return x
    diag = luu.diagonal()
    jacobi = LinearOperator(luu.shape, matvec=lambda r: r / diag, dtype=np.float64)
    sol, info = cg(luu, b, rtol=CG_RTOL, atol=0.0, M=jacobi, maxiter=20 * free.size)
    if info != 0:
        sol = spsolve(luu.tocsc(), b)
    x[free] = sol
    return x


def _component(g: MultiGraph, v: int):
    """Component of ``v`` as ``(subgraph, ids, local)`` with ``local[old] = new`` or -1."""
    ids = np.flatnonzero(bfs_distances(g, v) >= 0)
    sub, ids = induced_subgraph(g, ids)
    local = np.full(g.vertex_count, -1, dtype=np.int64)
    local[ids] = np.arange(len(ids))
    return sub, ids, local


def effective_resistance(g: MultiGraph, a: int, b: int) -> float:
    """``R_eff(a, b)``: unit current in at ``a``, out at ``b`` (grounded)."""
    vertex_set(g, [a, b])
    if a == b:
        raise PreconditionError("effective resistance needs two distinct vertices")
    sub, _, local = _component(g, a)
    if local[b] < 0:
        raise PreconditionError("vertices lie in different components")
    grounded = np.zeros(sub.vertex_count, dtype=bool)
    grounded[local[b]] = True
    rhs = np.zeros(sub.vertex_count)
    rhs[local[a]] = 1.0
    return float(solve_grounded(sub.laplacian(), grounded, rhs)[local[a]])


def escape_probability(g: MultiGraph, v: int, targets) -> float:
    """``P_v(tau_A < tau_v^+)`` for the simple walk, which equals ``C_eff(v <-> A) / deg(v)``.

    Holding steps change neither the order of ``tau_A`` and ``tau_v^+`` nor whether a
    return happens, so the value is the same for the lazy walk.  Computed both from the
    effective conductance and from an absorbing-chain solve; the two must agree to 1e-9.
    """
    tset = vertex_set(g, targets)
    if tset.size == 0:
        raise PreconditionError("targets must be nonempty")
    if v in set(tset.tolist()):
        raise PreconditionError("start vertex lies in the target set")
    sub, _, local = _component(g, v)
    a = local[tset]
    a = a[a >= 0]
    if a.size == 0:
        raise PreconditionError("no target in the component of the start vertex")
    lv = local[v]
    n = sub.vertex_count
    adj = sub.adjacency()

    # conductance route: potential 1 at v, 0 on A
    grounded = np.zeros(n, dtype=bool)
    grounded[a] = True
    grounded[lv] = True
    rhs = adj[:, lv].toarray().ravel()
    volt = solve_grounded(sub.laplacian(), grounded, rhs)
    volt[lv] = 1.0
    row = adj[lv].toarray().ravel()
    row[lv] = 0.0
    by_conductance = float(row @ (1.0 - volt)) / sub.degrees[lv]

    # absorbing route: h = P(hit A before v), h = 1 on A, 0 at v
    p = LazyWalk(sub).transition_matrix(lazy=False)
    h = np.zeros(n)
    h[a] = 1.0
    free = np.flatnonzero(~grounded)
    if free.size:
        puu = p[free][:, free].tocsc()
        b = p[free][:, a] @ np.ones(a.size)
        h[free] = np.atleast_1d(spsolve(sp.identity(free.size, format="csc") - puu, b))
    by_absorption = float((p[lv] @ h)[0])

    if abs(by_conductance - by_absorption) > 1e-9:
        raise RuntimeError(f"escape probability routes disagree: {by_conductance} vs {by_absorption}")
    return by_conductance


def voltages(g: MultiGraph, z: int, targets) -> np.ndarray:
    """Potential for unit current from ``z`` to ``targets`` (held at 0); zero off z's component."""
    tset = vertex_set(g, targets)
    if z in set(tset.tolist()):
        raise PreconditionError("source lies in the target set")
    sub, ids, local = _component(g, z)
    a = local[tset]
    a = a[a >= 0]
    if a.size == 0:
        raise PreconditionError("no target in the component of the source")
    grounded = np.zeros(sub.vertex_count, dtype=bool)
    grounded[a] = True
    rhs = np.zeros(sub.vertex_count)
    rhs[local[z]] = 1.0
    out = np.zeros(g.vertex_count)
    out[ids] = solve_grounded(sub.laplacian(), grounded, rhs)
    return out


def voltage_hitting(g: MultiGraph, z: int, targets) -> float:
    """``E_z tau_Z`` for the simple walk as ``sum_x deg(x) v(x)``."""
    return float(g.degrees @ voltages(g, z, targets))


def commute_time_check(g: MultiGraph, v: int, w: int) -> tuple[float, float]:
    """``(E_v tau_w + E_w tau_v, 2 e(G) R_eff(v, w))`` for the simple walk on v's component."""
    if v == w:
        raise PreconditionError("commute time needs two distinct vertices")
    sub, _, local = _component(g, v)
    if local[w] < 0:
        raise PreconditionError("vertices lie in different components")
    lv, lw = int(local[v]), int(local[w])
    commute = hitting_times(sub, [lw], lazy=False)[lv] + hitting_times(sub, [lv], lazy=False)[lw]
    return float(commute), 2.0 * sub.edge_count * effective_resistance(sub, lv, lw)


def lazy_commute_time(g: MultiGraph, v: int, w: int) -> float:
    sub, _, local = _component(g, v)
    if local[w] < 0:
        raise PreconditionError("vertices lie in different components")
    lv, lw = int(local[v]), int(local[w])
    return float(hitting_times(sub, [lw])[lv] + hitting_times(sub, [lv])[lw])
