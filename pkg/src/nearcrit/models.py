"""Random graph generators: G(n, p), Poisson Galton-Watson trees, and the three-step
kernel / path / bush model of the emerging giant component.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decompose import GiantDecomposition
from .errors import PreconditionError, TreeOverflowError
from .graph import MultiGraph, RootedTree
from .rng import (
    SUPERCRITICAL,
    ModelParams,
    RngStream,
    sample_geometric_path_length,
    sample_normal,
    sample_poisson,
)

DEFAULT_TREE_CAP = 10 ** 8
PARITY_BATCH = 100


def _decode_pairs(k: np.ndarray):
    """Map linear indices over ``{(i, j): i < j}`` (ordered by j, then i) to pairs."""
    j = np.floor((1 + np.sqrt(1 + 8 * k.astype(np.float64))) / 2).astype(np.int64)
    j -= (j * (j - 1) // 2 > k)
    j += ((j + 1) * j // 2 <= k)
    return k - j * (j - 1) // 2, j


def sample_gnp(stream: RngStream, n: int, p: float) -> MultiGraph:
    """Erdos-Renyi G(n, p) by geometric skipping over the C(n, 2) pair order; O(n + m) time."""
    if not 0 <= p <= 1:
        raise PreconditionError("p must lie in [0, 1]")
    total = n * (n - 1) // 2
    if p == 0 or total == 0:
        return MultiGraph(n)
    expected = total * p
    chunk = int(expected + 6 * math.sqrt(expected) + 64)
    picked, last = [], -1
    while True:
        idx = last + np.cumsum(stream.gen.geometric(p, chunk))
        if idx[-1] >= total:
            picked.append(idx[idx < total])
            break
        picked.append(idx)
        last = int(idx[-1])
    i, j = _decode_pairs(np.concatenate(picked))
    return MultiGraph(n, np.column_stack([i, j]))


@dataclass(frozen=True)
class DegreeProfile:
    degrees: np.ndarray
    Lambda: float
    parity_rejections: int = 0
    lambda_rejections: int = 0

    @property
    def kernel_degrees(self) -> np.ndarray:
        return self.degrees[self.degrees >= 3]

    @property
    def N(self) -> int:
        return int(np.count_nonzero(self.degrees >= 3))

    def count(self, k: int) -> int:
        """``N_k``, the number of vertices of degree ``k``."""
        return int(np.count_nonzero(self.degrees == k))


def sample_degree_profile(stream: RngStream, params: ModelParams) -> DegreeProfile:
    """Step 1 degrees: ``Lambda ~ N(1+eps-mu, 1/(eps n))``, ``D_u ~ Poisson(Lambda)`` i.i.d.,
    conditioned on ``sum D_u 1{D_u >= 3}`` being even.

    Parity is enforced by rejection, redrawing the degrees up to ``PARITY_BATCH`` times
    per ``Lambda`` before redrawing ``Lambda``.  Draws with ``Lambda <= 0`` are rejected.
    """
    params.require(SUPERCRITICAL)
    eps, n, mu = params.epsilon, params.n, params.mu
    parity_rej = lam_rej = 0
    while True:
        lam = float(sample_normal(stream, 1 + eps - mu, 1 / (eps * n)))
        if lam <= 0:
            lam_rej += 1
            continue
        for _ in range(PARITY_BATCH):
            d = sample_poisson(stream, lam, n)
            if int(d[d >= 3].sum()) % 2 == 0:
                return DegreeProfile(d, lam, parity_rej, lam_rej)
            parity_rej += 1


def sample_kernel(stream: RngStream, profile: DegreeProfile) -> MultiGraph:
    """Configuration-model multigraph on the vertices with ``D_u >= 3``.

    One half-edge per unit of degree, paired by a uniform perfect matching; loops and
    parallel edges are kept.  Kernel vertex ``i`` is the i-th such ``u`` in id order.
    """
    deg = profile.kernel_degrees
    if int(deg.sum()) % 2:
        raise RuntimeError("odd half-edge total in a parity-conditioned profile")
    stubs = np.repeat(np.arange(len(deg)), deg)
    stubs = stubs[stream.gen.permutation(len(stubs))]
    return MultiGraph(len(deg), stubs.reshape(-1, 2))


def sample_pgw_forest(stream: RngStream, mu: float, roots: int, size_cap: int = DEFAULT_TREE_CAP):
    """``roots`` independent PGW(mu) trees grown level by level.

    Vertices are numbered breadth-first with roots ``0..roots-1``.  Returns
    ``(parent, tree)``: parent id (``-1`` for roots) and owning root of every vertex.
    Raises :class:`TreeOverflowError` as soon as a tree exceeds ``size_cap``.
    """
    if not 0 <= mu < 1:
        raise PreconditionError("mu must lie in [0, 1)")
    parents = [np.full(roots, -1, dtype=np.int64)]
    owners = [np.arange(roots, dtype=np.int64)]
    sizes = np.ones(roots, dtype=np.int64)
    frontier, frontier_tree, next_id = owners[0], owners[0], roots
    while frontier.size:
        kids = sample_poisson(stream, mu, frontier.size)
        total = int(kids.sum())
        if total == 0:
            break
        par = np.repeat(frontier, kids)
        own = np.repeat(frontier_tree, kids)
        sizes += np.bincount(own, minlength=roots)
        if sizes.max() > size_cap:
            raise TreeOverflowError(int(sizes.max()), size_cap)
        parents.append(par)
        owners.append(own)
        frontier = np.arange(next_id, next_id + total, dtype=np.int64)
        frontier_tree = own
        next_id += total
    return np.concatenate(parents), np.concatenate(owners)


def sample_pgw_tree(stream: RngStream, mu: float, size_cap: int = DEFAULT_TREE_CAP) -> RootedTree:
    parent, _ = sample_pgw_forest(stream, mu, 1, size_cap)
    return RootedTree(parent)


def _expand_paths(kernel: MultiGraph, lengths: np.ndarray):
    """Replace kernel edge ``e`` by a path of ``lengths[e]`` edges with fresh interior ids.

    Interior ids are allocated contiguously per edge after the kernel vertices.
    Returns ``(core edge array, paths, core vertex count)``.
    """
    N = kernel.vertex_count
    a, b = kernel.edges[:, 0], kernel.edges[:, 1]
    inner = lengths - 1
    offset = N + np.cumsum(inner) - inner
    per = np.repeat(np.arange(len(lengths)), lengths)
    k = np.arange(int(lengths.sum())) - np.repeat(np.cumsum(lengths) - lengths, lengths)
    u = np.where(k == 0, a[per], offset[per] + k - 1)
    v = np.where(k == lengths[per] - 1, b[per], offset[per] + k)
    paths = [
        [int(a[e]), *range(int(offset[e]), int(offset[e] + inner[e])), int(b[e])]
        for e in range(len(lengths))
    ]
    return np.column_stack([u, v]), paths, N + int(inner.sum())


def build_c1tilde(stream: RngStream, params: ModelParams, size_cap: int = DEFAULT_TREE_CAP) -> GiantDecomposition:
    """Sample the contiguous giant-component model in three steps.

    1. kernel: degree profile plus configuration-model pairing;
    2. each kernel edge becomes a path of Geom(1-mu) edges;
    3. a PGW(mu) tree is attached at every core vertex (root identified with it).

    Full-graph ids: core vertices first (kernel vertices, then path interiors), then
    tree vertices breadth-first.
    """
    params.require(SUPERCRITICAL)
    mu = params.mu
    profile = sample_degree_profile(stream, params)
    kernel = sample_kernel(stream, profile)
    if kernel.vertex_count == 0:
        raise PreconditionError("empty kernel; epsilon^3 n is too small")
    lengths = np.asarray(sample_geometric_path_length(stream, mu, kernel.edge_count), dtype=np.int64)
    core_edges, paths, H = _expand_paths(kernel, lengths)
    core = MultiGraph(H, core_edges)
    parent, owner = sample_pgw_forest(stream, mu, H, size_cap)
    kids = np.flatnonzero(parent >= 0)
    full = MultiGraph(len(parent), np.concatenate([core_edges, np.column_stack([parent[kids], kids])]))
    d = GiantDecomposition(
        full=full, core=core, kernel=kernel,
        core_ids=np.arange(H, dtype=np.int64), kernel_ids=np.arange(kernel.vertex_count, dtype=np.int64),
        paths=paths, disjoint_cycles=[], tree_root=owner, tree_parent=parent,
        meta={
            "Lambda": profile.Lambda,
            "parity_rejections": profile.parity_rejections,
            "lambda_rejections": profile.lambda_rejections,
            "N3": profile.count(3),
        },
    )
    return d
