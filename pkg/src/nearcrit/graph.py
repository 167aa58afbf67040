"""Immutable sparse multigraphs, rooted trees and the elementary algorithms on them.

Conventions used throughout the package:

* vertex ids are dense ``0..n-1``;
* parallel edges are stored individually;
* a loop contributes 2 to the degree of its endpoint, appears twice in that
  endpoint's incidence list, and counts once in ``e_G(S)``.  With this
  convention ``volume(S) == 2 * e_G(S) + |boundary(S)|`` holds verbatim.
"""
from __future__ import annotations

import io
import os
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import PreconditionError

UNREACHED = -1


def _frozen(a):
    a.setflags(write=False)
    return a


def _concat_ranges(starts, counts):
    """Indices ``starts[i] + k`` for ``k < counts[i]``, concatenated."""
    counts = np.asarray(counts, dtype=np.int64)
    total = int(counts.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    offsets = np.repeat(np.cumsum(counts) - counts, counts)
    return np.arange(total, dtype=np.int64) - offsets + np.repeat(np.asarray(starts, dtype=np.int64), counts)


class MultiGraph:
    """Undirected multigraph with loops, stored as an edge list plus CSR incidence.

    ``incidence(v)`` returns parallel arrays ``(neighbors, edge_ids)``.  Instances
    are immutable: all arrays are flagged read-only.
    """

    __slots__ = ("vertex_count", "edges", "indptr", "nbr", "eid", "degrees")

    def __init__(self, vertex_count: int, edges=()):
        n = int(vertex_count)
        if n < 0:
            raise PreconditionError("vertex_count must be nonnegative")
        e = np.array(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise PreconditionError("edge endpoint out of range")
        m = len(e)
        heads = np.concatenate([e[:, 0], e[:, 1]])
        tails = np.concatenate([e[:, 1], e[:, 0]])
        ids = np.concatenate([np.arange(m), np.arange(m)])
        order = np.lexsort((ids, heads))
        deg = np.bincount(heads, minlength=n).astype(np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        object.__setattr__(self, "vertex_count", n)
        object.__setattr__(self, "edges", _frozen(e))
        object.__setattr__(self, "indptr", _frozen(indptr))
        object.__setattr__(self, "nbr", _frozen(tails[order]))
        object.__setattr__(self, "eid", _frozen(ids[order]))
        object.__setattr__(self, "degrees", _frozen(deg))

    def __setattr__(self, name, value):
        raise AttributeError("MultiGraph is immutable")

    def __repr__(self):
        return f"MultiGraph(n={self.vertex_count}, m={self.edge_count})"

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def loop_count(self) -> int:
        return int(np.count_nonzero(self.edges[:, 0] == self.edges[:, 1]))

    def incidence(self, v: int):
        a, b = self.indptr[v], self.indptr[v + 1]
        return self.nbr[a:b], self.eid[a:b]

    def neighbors(self, v: int) -> np.ndarray:
        return self.nbr[self.indptr[v]:self.indptr[v + 1]]

    def adjacency(self) -> sp.csr_matrix:
        """Sparse adjacency with multiplicities; a loop puts 2 on the diagonal."""
        n = self.vertex_count
        rows = np.repeat(np.arange(n), self.degrees)
        a = sp.csr_matrix((np.ones(len(self.nbr)), (rows, self.nbr)), shape=(n, n))
        a.sum_duplicates()
        return a

    def laplacian(self) -> sp.csr_matrix:
        """Combinatorial Laplacian of the unit-resistor network (loops drop out)."""
        a = self.adjacency()
        return (sp.diags(self.degrees.astype(float)) - a).tocsr()

    def sorted_edges(self) -> np.ndarray:
        e = np.sort(self.edges, axis=1)
        return e[np.lexsort((e[:, 1], e[:, 0]))]


def vertex_set(g: MultiGraph, ids: Iterable[int]) -> np.ndarray:
    """Validate ``ids`` against ``g`` and return them as a sorted, duplicate-free array."""
    s = np.unique(np.asarray(list(ids) if not isinstance(ids, np.ndarray) else ids, dtype=np.int64))
    if s.size and (s[0] < 0 or s[-1] >= g.vertex_count):
        raise PreconditionError("vertex id out of range")
    return s


def _check_vertex(g, v):
    if not 0 <= v < g.vertex_count:
        raise PreconditionError(f"vertex {v} out of range for graph on {g.vertex_count} vertices")


def degree(g: MultiGraph, v: int) -> int:
    _check_vertex(g, v)
    return int(g.degrees[v])


def volume(g: MultiGraph, s) -> int:
    s = vertex_set(g, s)
    return int(g.degrees[s].sum())


def membership(g: MultiGraph, s) -> np.ndarray:
    mask = np.zeros(g.vertex_count, dtype=bool)
    mask[vertex_set(g, s)] = True
    return mask


def boundary_and_induced(g: MultiGraph, s) -> tuple[int, int]:
    """Return ``(e_G(S), |boundary(S)|)``.  Loops inside S count once in the first entry."""
    mask = membership(g, s)
    a = mask[g.edges[:, 0]]
    b = mask[g.edges[:, 1]]
    return int(np.count_nonzero(a & b)), int(np.count_nonzero(a ^ b))


def component_labels(g: MultiGraph) -> tuple[np.ndarray, np.ndarray]:
    """Label vertices by component, with label 0 the largest.

    Ties in size are broken by the smallest vertex id in the component.
    Returns ``(labels, sizes)``.
    """
    n = g.vertex_count
    if n == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    a = sp.csr_matrix((np.ones(g.edge_count), (g.edges[:, 0], g.edges[:, 1])), shape=(n, n))
    k, raw = connected_components(a, directed=False)
    sizes = np.bincount(raw, minlength=k)
    first = np.full(k, n, dtype=np.int64)
    np.minimum.at(first, raw, np.arange(n))
    order = np.lexsort((first, -sizes))
    relabel = np.empty(k, dtype=np.int64)
    relabel[order] = np.arange(k)
    return relabel[raw], sizes[order].astype(np.int64)


def components(g: MultiGraph) -> list[np.ndarray]:
    """Vertex partition into components, largest first (ties: smallest vertex id first)."""
    labels, sizes = component_labels(g)
    order = np.argsort(labels, kind="stable")
    return np.split(order, np.cumsum(sizes)[:-1]) if len(sizes) else []


def induced_subgraph(g: MultiGraph, vertices) -> tuple[MultiGraph, np.ndarray]:
    """Induced subgraph on ``vertices`` relabelled densely in increasing id order.

    Returns ``(subgraph, ids)`` where ``ids[new] == old``.
    """
    ids = vertex_set(g, vertices)
    new = np.full(g.vertex_count, -1, dtype=np.int64)
    new[ids] = np.arange(len(ids))
    u, v = new[g.edges[:, 0]], new[g.edges[:, 1]]
    keep = (u >= 0) & (v >= 0)
    return MultiGraph(len(ids), np.column_stack([u[keep], v[keep]])), ids


def largest_component(g: MultiGraph) -> tuple[MultiGraph, np.ndarray]:
    labels, _ = component_labels(g)
    return induced_subgraph(g, np.flatnonzero(labels == 0))


def tree_excess(g: MultiGraph, part) -> int:
    """``e(part) - |part| + 1``; zero iff the (connected) part is a tree."""
    s = vertex_set(g, part)
    inside, _ = boundary_and_induced(g, s)
    return inside - len(s) + 1


def bfs_distances(g: MultiGraph, src) -> np.ndarray:
    """Hop distances from ``src`` (an id or a collection of ids); unreachable is ``UNREACHED``."""
    sources = np.atleast_1d(np.asarray(src, dtype=np.int64))
    for s in sources:
        _check_vertex(g, int(s))
    dist = np.full(g.vertex_count, UNREACHED, dtype=np.int64)
    dist[sources] = 0
    frontier = np.unique(sources)
    level = 0
    while frontier.size:
        level += 1
        idx = _concat_ranges(g.indptr[frontier], g.degrees[frontier])
        nxt = np.unique(g.nbr[idx])
        nxt = nxt[dist[nxt] == UNREACHED]
        dist[nxt] = level
        frontier = nxt
    return dist


class RootedTree:
    """A rooted tree given by a parent array (the root's parent is ``-1``).

    ``level[v]`` is the depth of ``v``; ``children(v)`` lists its children.
    """

    __slots__ = ("parent", "level", "root", "child_ptr", "child")

    def __init__(self, parent: Sequence[int]):
        par = np.array(parent, dtype=np.int64).reshape(-1)
        size = len(par)
        if size == 0:
            raise PreconditionError("a tree has at least one vertex")
        roots = np.flatnonzero(par < 0)
        if len(roots) != 1:
            raise PreconditionError("a tree needs exactly one root")
        if np.any(par >= size):
            raise PreconditionError("parent id out of range")
        root = int(roots[0])
        nonroot = np.flatnonzero(par >= 0)
        order = nonroot[np.argsort(par[nonroot], kind="stable")]
        counts = np.bincount(par[nonroot], minlength=size)
        ptr = np.zeros(size + 1, dtype=np.int64)
        np.cumsum(counts, out=ptr[1:])
        level = np.full(size, -1, dtype=np.int64)
        level[root] = 0
        frontier = np.array([root])
        depth = 0
        while frontier.size:
            depth += 1
            kids = order[_concat_ranges(ptr[frontier], counts[frontier])]
            level[kids] = depth
            frontier = kids
        if np.any(level < 0):
            raise PreconditionError("parent links contain a cycle")
        for name, val in (("parent", par), ("level", level), ("child_ptr", ptr), ("child", order)):
            object.__setattr__(self, name, _frozen(val))
        object.__setattr__(self, "root", root)

    def __setattr__(self, name, value):
        raise AttributeError("RootedTree is immutable")

    def __repr__(self):
        return f"RootedTree(size={self.size}, height={self.height})"

    @property
    def size(self) -> int:
        return len(self.parent)

    @property
    def height(self) -> int:
        return int(self.level.max())

    def children(self, v: int) -> np.ndarray:
        return self.child[self.child_ptr[v]:self.child_ptr[v + 1]]

    def subtree_sizes(self) -> np.ndarray:
        sizes = np.ones(self.size, dtype=np.int64)
        for d in range(self.height, 0, -1):
            at = np.flatnonzero(self.level == d)
            np.add.at(sizes, self.parent[at], sizes[at])
        return sizes

    def level_counts(self) -> np.ndarray:
        return np.bincount(self.level)

    def to_graph(self) -> MultiGraph:
        kids = np.flatnonzero(self.parent >= 0)
        return MultiGraph(self.size, np.column_stack([self.parent[kids], kids]))


def tree_diameter(t: RootedTree) -> int:
    """Longest path in edges, by double sweep (exact on trees)."""
    g = t.to_graph()
    a = int(np.argmax(t.level))
    return int(bfs_distances(g, a).max())


# -- edge-list text format: "n m" then m lines "u v" ---------------------------------


def write_edge_list(g: MultiGraph, dest) -> None:
    """Write ``g``; edges are normalized to ``u <= v`` and sorted lexicographically."""
    e = g.sorted_edges()
    buf = io.StringIO()
    buf.write(f"{g.vertex_count} {g.edge_count}\n")
    if len(e):
        np.savetxt(buf, e, fmt="%d")
    text = buf.getvalue()
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    else:
        dest.write(text)


def read_edge_list(src) -> MultiGraph:
    if isinstance(src, (str, os.PathLike)):
        with open(src, encoding="ascii") as fh:
            text = fh.read()
    else:
        text = src.read()
    head, _, body = text.lstrip().partition("\n")
    header = head.split()
    if len(header) != 2:
        raise PreconditionError("edge-list header must be 'n m'")
    n, m = int(header[0]), int(header[1])
    try:
        tokens = np.array(body.split(), dtype=np.int64)
    except ValueError as exc:
        raise PreconditionError(f"malformed edge line: {exc}") from None
    if tokens.size != 2 * m:
        raise PreconditionError(f"header announces {m} edges, found {tokens.size / 2:g}")
    return MultiGraph(n, tokens.reshape(-1, 2))
