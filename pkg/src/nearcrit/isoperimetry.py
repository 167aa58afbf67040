"""Isoperimetric numbers, set conductances and dyadic conductance profiles.

For the lazy walk ``pi(x) = deg(x) / 2e`` and ``p_xy = A_xy / (2 deg(x))`` off the
diagonal, so the stationary flow out of ``S`` is ``|boundary(S)| / 4e`` and

    Phi(S) = (|boundary(S)| / 4e) / (pi(S) pi(S^c)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import PreconditionError, ResourceCapError
from .graph import MultiGraph, boundary_and_induced, component_labels, vertex_set

ISO_MAX_VERTICES = 24
CONNECTED_SET_LIMIT = 2_000_000
_CHUNK = 1 << 20


def _require_connected(g):
    if g.vertex_count == 0 or len(component_labels(g)[1]) != 1:
        raise PreconditionError("graph must be connected and nonempty")


def isoperimetric_number(g: MultiGraph, return_set: bool = False):
    """``min |boundary(S)| / d(S)`` over nonempty ``S`` with ``d(S) <= e(G)``, exactly.

    Enumerates all ``2^n`` subsets in vectorized chunks, so ``n <= 24``.
    """
    n = g.vertex_count
    if n > ISO_MAX_VERTICES:
        raise PreconditionError(
            f"exact enumeration limited to {ISO_MAX_VERTICES} vertices; use conductance_profile(mode='sampled')")
    _require_connected(g)
    if g.edge_count == 0:
        raise PreconditionError("graph has no edges")
    deg = g.degrees
    e = g.edge_count
    best, best_mask = None, None
    for lo in range(1, 1 << n, _CHUNK):
        masks = np.arange(lo, min(lo + _CHUNK, 1 << n), dtype=np.int64)
        bits = (masks[:, None] >> np.arange(n)) & 1
        vol = bits @ deg
        bnd = np.zeros(len(masks), dtype=np.int64)
        for u, v in g.edges:
            bnd += bits[:, u] ^ bits[:, v]
        ok = (vol <= e) & (vol > 0)
        if not ok.any():
            continue
        ratio = np.where(ok, bnd / np.maximum(vol, 1), np.inf)
        close = np.flatnonzero(ratio <= ratio.min() + 1e-9)
        for i in close:
            val = Fraction(int(bnd[i]), int(vol[i]))
            if best is None or val < best:
                best, best_mask = val, int(masks[i])
    if return_set:
        return best, np.array([v for v in range(n) if best_mask >> v & 1])
    return best


def flow_numerator_exact(g: MultiGraph, s) -> Fraction:
    """``sum_{x in S, y not in S} pi(x) p_xy`` for the lazy walk, in exact arithmetic."""
    s = set(vertex_set(g, s).tolist())
    two_e = 2 * g.edge_count
    total = Fraction(0)
    for x in s:
        dx = int(g.degrees[x])
        for y in g.neighbors(x).tolist():
            if y not in s:
                total += Fraction(dx, two_e) * Fraction(1, 2 * dx)
    return total


def set_conductance_exact(g: MultiGraph, s) -> Fraction:
    s = vertex_set(g, s)
    if s.size == 0 or s.size == g.vertex_count:
        raise PreconditionError("S must be a proper nonempty subset")
    two_e = 2 * g.edge_count
    pis = Fraction(int(g.degrees[s].sum()), two_e)
    if pis == 0 or pis == 1:
        raise PreconditionError("S must have stationary mass strictly between 0 and 1")
    _, bnd = boundary_and_induced(g, s)
    return Fraction(bnd, 2 * two_e) / (pis * (1 - pis))


def set_conductance(g: MultiGraph, s) -> float:
    return float(set_conductance_exact(g, s))


@dataclass(frozen=True)
class ConductanceProfile:
    """``Phi(2^-j)`` for ``j = 1..ceil(log2(1/pi_min))``."""

    p: tuple
    phi: tuple
    pi_min: float
    certified: bool = True

    def __post_init__(self):
        if len(self.p) != len(self.phi):
            raise ValueError("p and phi differ in length")

    @property
    def j_max(self) -> int:
        return dyadic_levels(self.pi_min)

    def as_dict(self) -> dict:
        return {
            "pi_min": self.pi_min,
            "certified": self.certified,
            "buckets": [{"j": j + 1, "p": p, "phi": f} for j, (p, f) in enumerate(zip(self.p, self.phi))],
        }


def dyadic_levels(pi_min: float) -> int:
    return max(0, math.ceil(math.log2(1.0 / pi_min) - 1e-12))


def _buckets_for(vol: int, two_e: int, jmax: int):
    """Levels ``j`` in ``1..jmax`` with ``2^-(j+1) <= vol/2e <= 2^-j`` (exact integer test)."""
    out = []
    j = (two_e // vol).bit_length() - 1
    for jj in (j - 1, j):
        if 1 <= jj <= jmax and vol << jj <= two_e <= vol << (jj + 1):
            out.append(jj)
    return out


def connected_sets(g: MultiGraph, limit: int = CONNECTED_SET_LIMIT):
    """Yield ``(bitmask, volume, boundary)`` for every connected vertex set, each once.

    Sets are grown from their smallest vertex, extending only by vertices not yet
    adjacent to the current set.
    """
    n = g.vertex_count
    nb = [0] * n
    mult = [dict() for _ in range(n)]
    for v in range(n):
        for w in g.neighbors(v).tolist():
            mult[v][w] = mult[v].get(w, 0) + 1
            if w != v:
                nb[v] |= 1 << w
    deg = g.degrees.tolist()
    loops = [mult[v].get(v, 0) // 2 for v in range(n)]
    count = 0

    def extend(sub, ext, closed, vol, inner, above):
        nonlocal count
        count += 1
        if count > limit:
            raise ResourceCapError(f"more than {limit} connected sets")
        yield sub, vol, vol - 2 * inner
        while ext:
            low = ext & -ext
            ext ^= low
            w = low.bit_length() - 1
            add_inner = loops[w] + sum(c for u, c in mult[w].items() if u != w and sub >> u & 1)
            yield from extend(sub | low, ext | (nb[w] & ~closed & above), closed | nb[w],
                              vol + deg[w], inner + add_inner, above)

    for v in range(n):
        above = ~((1 << (v + 1)) - 1)
        yield from extend(1 << v, nb[v] & above, nb[v] | 1 << v, deg[v], loops[v], above)


def _phi(bnd, vol, two_e):
    pis = vol / two_e
    return (bnd / (2 * two_e)) / (pis * (1 - pis))


def conductance_profile(g: MultiGraph, mode: str = "exact", stream=None, seeds: int = 512,
                        iterations: int = 200, limit: int = CONNECTED_SET_LIMIT) -> ConductanceProfile:
    """Dyadic conductance profile over connected sets; ``Phi(p) = 1`` for empty buckets.

    ``exact`` enumerates connected sets (capped at ``limit``).  ``sampled`` runs a local
    search from random connected seeds; its values can only over-estimate the true
    minima and the profile is flagged ``certified=False``.
    """
    _require_connected(g)
    two_e = 2 * g.edge_count
    if two_e == 0:
        raise PreconditionError("graph has no edges")
    pi_min = float(g.degrees.min()) / two_e
    jmax = dyadic_levels(pi_min)
    best = [1.0] * jmax
    if mode == "exact":
        for _, vol, bnd in connected_sets(g, limit):
            if vol >= two_e:
                continue
            for j in _buckets_for(vol, two_e, jmax):
                f = _phi(bnd, vol, two_e)
                if f < best[j - 1]:
                    best[j - 1] = f
        certified = True
    elif mode == "sampled":
        if stream is None:
            raise PreconditionError("sampled mode needs an RngStream")
        for j in range(1, jmax + 1):
            best[j - 1] = min(best[j - 1], _local_search(g, j, stream, seeds, iterations))
        certified = False
    else:
        raise PreconditionError(f"unknown mode {mode!r}")
    return ConductanceProfile(tuple(2.0 ** -j for j in range(1, jmax + 1)), tuple(best), pi_min, certified)


def _local_search(g: MultiGraph, j: int, stream, seeds: int, iterations: int) -> float:
    """Best Phi found in bucket ``j`` by growing BFS balls and applying greedy
    add-boundary-vertex / drop-leaf moves that stay inside the bucket."""
    n = g.vertex_count
    two_e = 2 * g.edge_count
    lo, hi = two_e / 2 ** (j + 1), two_e / 2 ** j
    deg = g.degrees.tolist()
    indptr = g.indptr.tolist()
    nbr = g.nbr.tolist()
    gen = stream.gen
    best = 1.0
    for _ in range(seeds):
        start = int(gen.integers(n))
        inside = bytearray(n)
        members, pos = [], {}
        vol = 0
        inner2 = 0  # twice the induced edge count, loops included

        def add(w):
            nonlocal vol, inner2
            inside[w] = 1
            pos[w] = len(members)
            members.append(w)
            vol += deg[w]
            inner2 += 2 * sum(1 for u in nbr[indptr[w]:indptr[w + 1]] if inside[u] and u != w)
            inner2 += sum(1 for u in nbr[indptr[w]:indptr[w + 1]] if u == w)

        def drop(x):
            nonlocal vol, inner2
            inner2 -= 2 * sum(1 for u in nbr[indptr[x]:indptr[x + 1]] if inside[u] and u != x)
            inner2 -= sum(1 for u in nbr[indptr[x]:indptr[x + 1]] if u == x)
            inside[x] = 0
            vol -= deg[x]
            i = pos.pop(x)
            last = members.pop()
            if last != x:
                members[i] = last
                pos[last] = i

        queue, head = [start], 0
        inside_q = {start}
        while vol < lo and head < len(queue):
            w = queue[head]
            head += 1
            add(w)
            for u in nbr[indptr[w]:indptr[w + 1]]:
                if u not in inside_q:
                    inside_q.add(u)
                    queue.append(u)
        if not lo <= vol <= hi or vol >= two_e:
            continue
        cur = _phi(vol - inner2, vol, two_e)
        for _ in range(iterations):
            x = members[int(gen.integers(len(members)))]
            slot = indptr[x] + int(gen.integers(deg[x]))
            y = nbr[slot]
            if not inside[y]:
                delta_in = 2 * sum(1 for u in nbr[indptr[y]:indptr[y + 1]] if inside[u] and u != y)
                delta_in += sum(1 for u in nbr[indptr[y]:indptr[y + 1]] if u == y)
                nvol, ninner = vol + deg[y], inner2 + delta_in
                if lo <= nvol <= hi and nvol < two_e:
                    f = _phi(nvol - ninner, nvol, two_e)
                    if f <= cur:
                        add(y)
                        cur = f
            elif len(members) > 1:
                others = {u for u in nbr[indptr[x]:indptr[x + 1]] if inside[u] and u != x}
                if len(others) == 1:
                    delta_in = 2 * sum(1 for u in nbr[indptr[x]:indptr[x + 1]] if inside[u] and u != x)
                    delta_in += sum(1 for u in nbr[indptr[x]:indptr[x + 1]] if u == x)
                    nvol, ninner = vol - deg[x], inner2 - delta_in
                    if lo <= nvol <= hi:
                        f = _phi(nvol - ninner, nvol, two_e)
                        if f <= cur:
                            drop(x)
                            cur = f
        best = min(best, cur)
    return best


def fr_upper_bound(profile: ConductanceProfile) -> float:
    """The constant-free averaged-conductance sum ``sum_j Phi(2^-j)^-2``."""
    if len(profile.phi) != profile.j_max:
        raise PreconditionError("profile is incomplete")
    phi = np.asarray(profile.phi, dtype=np.float64)
    if np.any(phi <= 0):
        raise PreconditionError("zero conductance; a connected graph cannot produce this")
    return float(np.sum(phi ** -2.0))
