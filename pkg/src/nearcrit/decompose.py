"""Structure recovery: k-cores, kernel contraction, attached trees, exploration, tree events."""
from __future__ import annotations

from collections import deque
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError
from .graph import (
    MultiGraph,
    RootedTree,
    _concat_ranges,
    component_labels,
    induced_subgraph,
    tree_diameter,
)
from .rng import RngStream


class _TreeMap(Mapping):
    """Lazy ``core vertex -> RootedTree`` view over a forest stored as parent/root arrays."""

    def __init__(self, tree_root, tree_parent, core_count):
        self._root = tree_root
        self._parent = tree_parent
        self._n = core_count
        self._groups = None

    def _group(self):
        if self._groups is None:
            order = np.argsort(self._root, kind="stable")
            counts = np.bincount(self._root, minlength=self._n)
            ptr = np.zeros(self._n + 1, dtype=np.int64)
            np.cumsum(counts, out=ptr[1:])
            self._groups = (order, ptr)
        return self._groups

    def __getitem__(self, v):
        if not 0 <= v < self._n:
            raise KeyError(v)
        order, ptr = self._group()
        members = order[ptr[v]:ptr[v + 1]]
        local = {int(x): i for i, x in enumerate(members)}
        parent = [local[int(p)] if p >= 0 else -1 for p in self._parent[members]]
        return RootedTree(parent)

    def __iter__(self):
        return iter(range(self._n))

    def __len__(self):
        return self._n


@dataclass(eq=False)
class GiantDecomposition:
    """Kernel / 2-core / attached-forest view of one connected graph.

    Ids live at three levels.  ``core_ids[c]`` is the full-graph id of core vertex ``c``;
    ``kernel_ids[k]`` is the core id of kernel vertex ``k``.  ``paths[e]`` lists the core
    ids along the 2-path that kernel edge ``e`` contracts, from the core image of
    ``kernel.edges[e, 0]`` to that of ``kernel.edges[e, 1]``.  Every full vertex carries
    ``tree_root`` (the core id its attached tree hangs from) and ``tree_parent`` (full
    id of its tree parent, ``-1`` on the core).
    """

    full: MultiGraph
    core: MultiGraph
    kernel: MultiGraph
    core_ids: np.ndarray
    kernel_ids: np.ndarray
    paths: list
    disjoint_cycles: list
    tree_root: np.ndarray
    tree_parent: np.ndarray
    trivial: bool = False
    trivial_tree: RootedTree | None = None
    meta: dict = field(default_factory=dict)
    tree_of_core_vertex: Mapping = field(init=False, repr=False)

    def __post_init__(self):
        self.tree_of_core_vertex = _TreeMap(self.tree_root, self.tree_parent, self.core.vertex_count)

    @property
    def path_lengths(self) -> np.ndarray:
        """Edge count of each kernel edge's 2-path."""
        return np.array([len(p) - 1 for p in self.paths], dtype=np.int64)

    @property
    def tree_sizes(self) -> np.ndarray:
        """``|T_v|`` for each core vertex ``v`` (the root counts)."""
        if self.trivial:
            return np.zeros(0, dtype=np.int64)
        return np.bincount(self.tree_root, minlength=self.core.vertex_count)

    def tree_depths(self) -> np.ndarray:
        """Depth of every full vertex inside its attached tree (0 on the core)."""
        depth = np.zeros(self.full.vertex_count, dtype=np.int64)
        par = self.tree_parent
        todo = np.flatnonzero(par >= 0)
        cur = par[todo]
        while todo.size:
            depth[todo] += 1
            more = par[cur] >= 0
            todo, cur = todo[more], par[cur[more]]
        return depth

    def summary(self) -> dict:
        sizes = self.tree_sizes
        return {
            "full_size": self.full.vertex_count,
            "core_size": self.core.vertex_count,
            "core_edges": self.core.edge_count,
            "kernel_size": self.kernel.vertex_count,
            "kernel_edges": self.kernel.edge_count,
            "kernel_loops": self.kernel.loop_count,
            "longest_2path": longest_2path(self),
            "tree_count": int(np.count_nonzero(sizes > 1)),
            "max_tree": int(sizes.max()) if sizes.size else (self.full.vertex_count if self.trivial else 0),
            "disjoint_cycles": len(self.disjoint_cycles),
            "trivial": self.trivial,
        }

    def validate(self) -> None:
        """Check every structural invariant; raise ``AssertionError`` on the first violation."""
        core, kernel = self.core, self.kernel
        if self.trivial:
            assert core.vertex_count == 0 and kernel.vertex_count == 0
            assert self.trivial_tree is not None and self.trivial_tree.size == self.full.vertex_count
            return
        assert np.all(kernel.degrees >= 3), "kernel vertex of degree < 3"
        lengths = self.path_lengths
        assert np.all(lengths >= 1)
        internal = np.concatenate([np.asarray(p[1:-1], dtype=np.int64) for p in self.paths] or [np.zeros(0, np.int64)])
        assert np.all(core.degrees[internal] == 2), "2-path interior vertex of core degree != 2"
        cyc_vertices = sum(len(c) for c in self.disjoint_cycles)
        assert core.vertex_count == kernel.vertex_count + int(np.sum(lengths - 1)) + cyc_vertices
        assert self.full.vertex_count == core.vertex_count + int(np.sum(self.tree_sizes - 1))
        # endpoints of each path are the kernel edge's endpoints
        if len(self.paths):
            ends = np.array([[p[0], p[-1]] for p in self.paths], dtype=np.int64)
            assert np.array_equal(ends, self.kernel_ids[kernel.edges]), "path endpoints disagree with kernel"
        # the paths and cycles partition the core's edges
        pieces = [np.column_stack([p[:-1], p[1:]]) for p in map(np.asarray, self.paths)]
        pieces += [np.column_stack([c, np.roll(c, -1)]) for c in map(np.asarray, self.disjoint_cycles)]
        used = MultiGraph(core.vertex_count, np.concatenate(pieces) if pieces else np.zeros((0, 2)))
        assert np.array_equal(used.sorted_edges(), core.sorted_edges()), "paths do not cover the core"
        # core is the induced subgraph of full on core_ids; trees hang off it
        sub, _ = induced_subgraph(self.full, self.core_ids)
        assert np.array_equal(sub.sorted_edges(), core.sorted_edges())
        assert np.all(self.tree_parent[self.core_ids] == -1)
        assert np.array_equal(self.tree_root[self.core_ids], np.arange(core.vertex_count))


def k_core(g: MultiGraph, k: int, order: str = "stack") -> np.ndarray:
    """Vertices of the k-core, found by repeatedly deleting vertices of degree < k.

    ``order`` picks the deletion discipline (``"stack"`` or ``"queue"``); the result
    does not depend on it.
    """
    if k < 1:
        raise PreconditionError("k must be positive")
    n = g.vertex_count
    deg = g.degrees.tolist()
    indptr = g.indptr.tolist()
    nbr = g.nbr.tolist()
    removed = bytearray(n)
    queued = bytearray(n)
    pending = deque(v for v in range(n) if deg[v] < k)
    for v in pending:
        queued[v] = 1
    pop = pending.pop if order == "stack" else pending.popleft
    while pending:
        v = pop()
        removed[v] = 1
        for w in nbr[indptr[v]:indptr[v + 1]]:
            if w != v and not removed[w]:
                deg[w] -= 1
                if deg[w] < k and not queued[w]:
                    queued[w] = 1
                    pending.append(w)
    return np.flatnonzero(np.frombuffer(bytes(removed), dtype=np.uint8) == 0)


def kernel_decompose(core: MultiGraph):
    """Contract maximal 2-paths of a min-degree-2 multigraph.

    Returns ``(kernel, kernel_ids, paths, cycles)``: kernel vertex ``k`` is core vertex
    ``kernel_ids[k]``; ``paths[e]`` is the core-vertex sequence contracted into kernel
    edge ``e``; ``cycles`` are the components made only of degree-2 vertices.
    """
    n = core.vertex_count
    if n and core.degrees.min() < 2:
        raise PreconditionError("kernel_decompose needs minimum degree >= 2")
    deg = core.degrees.tolist()
    indptr = core.indptr.tolist()
    nbr = core.nbr.tolist()
    eid = core.eid.tolist()
    kernel_ids = np.flatnonzero(core.degrees >= 3)
    knew = {int(v): i for i, v in enumerate(kernel_ids)}
    used = bytearray(core.edge_count)
    seen = bytearray(n)
    paths, kedges = [], []

    def walk(start, slot):
        # follow degree-2 vertices from incidence slot until a vertex of degree != 2 (or start)
        e = eid[slot]
        used[e] = 1
        path = [start]
        cur = nbr[slot]
        while deg[cur] == 2 and cur != start:
            seen[cur] = 1
            path.append(cur)
            a = indptr[cur]
            j = a + 1 if eid[a] == e else a
            e = eid[j]
            used[e] = 1
            cur = nbr[j]
        path.append(cur)
        return path

    for u in kernel_ids.tolist():
        seen[u] = 1
        for slot in range(indptr[u], indptr[u + 1]):
            if used[eid[slot]]:
                continue
            path = walk(u, slot)
            paths.append(path)
            kedges.append((knew[u], knew[path[-1]]))

    cycles = []
    for s in range(n):
        if not seen[s]:
            seen[s] = 1
            cycles.append(walk(s, indptr[s])[:-1])
    kernel = MultiGraph(len(kernel_ids), kedges)
    return kernel, kernel_ids, paths, cycles


def _attached_forest(g: MultiGraph, core_ids: np.ndarray):
    """Multi-source BFS from the core: parent (full ids) and root (core ids) of every vertex."""
    n = g.vertex_count
    parent = np.full(n, -1, dtype=np.int64)
    root = np.full(n, -1, dtype=np.int64)
    root[core_ids] = np.arange(len(core_ids))
    frontier = core_ids
    while frontier.size:
        idx = _concat_ranges(g.indptr[frontier], g.degrees[frontier])
        src = np.repeat(frontier, g.degrees[frontier])
        tgt = g.nbr[idx]
        fresh = root[tgt] < 0
        tgt, src = tgt[fresh], src[fresh]
        tgt, first = np.unique(tgt, return_index=True)
        parent[tgt] = src[first]
        root[tgt] = root[src[first]]
        frontier = tgt
    return root, parent


def decompose_extracted_giant(g: MultiGraph) -> GiantDecomposition:
    """Decompose a connected graph into kernel, 2-core and attached trees.

    A graph without a 2-core comes back flagged ``trivial`` with the whole graph as a
    single tree rooted at vertex 0.
    """
    n = g.vertex_count
    if n == 0:
        raise PreconditionError("empty graph")
    _, sizes = component_labels(g)
    if len(sizes) != 1:
        raise PreconditionError("decompose_extracted_giant needs a connected graph")
    core_ids = k_core(g, 2)
    empty = np.zeros(0, dtype=np.int64)
    if core_ids.size == 0:
        root, parent = _attached_forest(g, np.array([0]))
        return GiantDecomposition(
            full=g, core=MultiGraph(0), kernel=MultiGraph(0), core_ids=empty, kernel_ids=empty,
            paths=[], disjoint_cycles=[], tree_root=np.full(n, -1, dtype=np.int64),
            tree_parent=np.full(n, -1, dtype=np.int64), trivial=True, trivial_tree=RootedTree(parent),
        )
    core, core_ids = induced_subgraph(g, core_ids)
    kernel, kernel_ids, paths, cycles = kernel_decompose(core)
    root, parent = _attached_forest(g, core_ids)
    return GiantDecomposition(
        full=g, core=core, kernel=kernel, core_ids=core_ids, kernel_ids=kernel_ids,
        paths=paths, disjoint_cycles=cycles, tree_root=root, tree_parent=parent,
    )


def longest_2path(d: GiantDecomposition) -> int:
    return max((len(p) - 1 for p in d.paths), default=0)


def explore_components(stream: RngStream, n: int, epsilon: float, vertex_budget: int):
    """Breadth-first exploration of G(n, (1-eps)/n), one component at a time.

    Each active vertex exposes ``Bin(#unseen, p)`` new children; tree-excess edges are
    never queried.  Stops once ``vertex_budget`` vertices are exposed and returns
    ``(sizes of the completed components, exposed count)``.
    """
    if not 0 < epsilon < 1:
        raise PreconditionError("epsilon must lie in (0, 1)")
    budget = max(0, min(int(vertex_budget), n))
    p = (1 - epsilon) / n
    binom = stream.gen.binomial
    neutral, exposed = n, 0
    sizes = []
    while exposed < budget and neutral > 0:
        neutral -= 1
        exposed += 1
        active, size = 1, 1
        while active:
            active -= 1
            k = int(binom(neutral, p)) if neutral else 0
            neutral -= k
            exposed += k
            active += k
            size += k
            if active and exposed >= budget:
                return sizes, exposed
        sizes.append(size)
    return sizes, exposed


EVENT_A = "A"
EVENT_B = "B"


def detect_tree_event(t: RootedTree, r: int, s: int, kind: str) -> bool:
    """Tree events used by the lower bounds.

    ``A``: some vertex at depth ``r`` has a subtree of size >= ``s``.
    ``B``: two distinct vertices with subtrees of size >= ``s`` are at distance exactly ``r``.

    For ``B``, the heavy vertices form a root-containing subtree (heaviness passes to
    parents), and a tree has a pair at every distance up to its diameter, so the event
    reduces to ``r >= 1`` and ``diameter(heavy subtree) >= r``.
    """
    if r < 0 or s < 1:
        raise PreconditionError("need r >= 0 and s >= 1")
    sizes = t.subtree_sizes()
    if kind == EVENT_A:
        return bool(np.any((t.level == r) & (sizes >= s)))
    if kind != EVENT_B:
        raise PreconditionError(f"unknown event kind {kind!r}")
    heavy = np.flatnonzero(sizes >= s)
    if r < 1 or heavy.size < 2:
        return False
    local = np.full(t.size, -1, dtype=np.int64)
    local[heavy] = np.arange(heavy.size)
    par = t.parent[heavy]
    sub = RootedTree(np.where(par >= 0, local[np.maximum(par, 0)], -1))
    return tree_diameter(sub) >= r
