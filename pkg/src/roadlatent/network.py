"""Static road-network topology, graph Laplacian, and SCC-based update ordering."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import DataError

__all__ = [
    "RoadNetwork",
    "LaplacianTriple",
    "SccOrdering",
    "build_proximity_laplacian",
    "condense_scc",
    "update_ordering",
]


@dataclass(frozen=True)
class RoadNetwork:
    """Directed graph shared by every traffic snapshot.

    Vertices are the integers ``0..n-1``. ``edges`` is kept in canonical
    ``(src, dst)`` sort order. ``coords`` (optional, n x 2) are unitless planar
    positions used by the nearest-neighbour baseline and the synthetic
    generator only.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    coords: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise DataError(f"vertex count must be positive, got {self.n}")
        canon = tuple(sorted((int(s), int(d)) for s, d in self.edges))
        for s, d in canon:
            if s == d:
                raise DataError(f"self-loop edge ({s},{d}) is not allowed")
            if not (0 <= s < self.n and 0 <= d < self.n):
                raise DataError(f"edge ({s},{d}) endpoint out of range [0,{self.n})")
        if len(set(canon)) != len(canon):
            raise DataError("duplicate directed edges")
        object.__setattr__(self, "edges", canon)
        if self.coords is not None:
            coords = np.asarray(self.coords, dtype=float)
            if coords.shape != (self.n, 2):
                raise DataError(f"coords must have shape ({self.n}, 2), got {coords.shape}")
            object.__setattr__(self, "coords", coords)

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_array(self) -> np.ndarray:
        """Edges as an (m, 2) int array in canonical order."""
        if not self.edges:
            return np.empty((0, 2), dtype=np.int64)
        return np.asarray(self.edges, dtype=np.int64)

    @cached_property
    def out_neighbors(self) -> tuple[tuple[int, ...], ...]:
        """Per-vertex tuple of destination vertices, ascending."""
        outs: list[list[int]] = [[] for _ in range(self.n)]
        for s, d in self.edges:
            outs[s].append(d)
        return tuple(tuple(o) for o in outs)

    @cached_property
    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges)

    def has_edge(self, src: int, dst: int) -> bool:
        return (src, dst) in self.edge_set


@dataclass(frozen=True)
class LaplacianTriple:
    """Symmetric proximity matrix W, degree diagonal D, and Laplacian L = D - W."""

    W: sp.csr_matrix
    D: sp.csr_matrix
    L: sp.csr_matrix

    @property
    def degrees(self) -> np.ndarray:
        return np.asarray(self.D.diagonal())


@dataclass(frozen=True)
class SccOrdering:
    """Vertex visitation order derived from strongly connected components.

    ``order`` is a permutation of vertex ids; for every edge (i, j) whose
    endpoints lie in different SCCs, j appears before i. ``component_of``
    maps each vertex to its SCC id, where ids follow the same sink-first
    order the permutation uses.
    """

    order: np.ndarray
    component_of: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "order", np.asarray(self.order, dtype=np.int64))
        object.__setattr__(self, "component_of", np.asarray(self.component_of, dtype=np.int64))

    @cached_property
    def position(self) -> np.ndarray:
        """position[v] = index of vertex v in ``order``."""
        pos = np.empty_like(self.order)
        pos[self.order] = np.arange(len(self.order))
        return pos

    @property
    def n_components(self) -> int:
        return int(self.component_of.max()) + 1 if len(self.component_of) else 0


def build_proximity_laplacian(network: RoadNetwork) -> LaplacianTriple:
    """Build W as the symmetrized binary adjacency, D its row sums, L = D - W.

    Edge direction is ignored: W[i, j] = 1 iff (i, j) or (j, i) is an edge.
    """
    n = network.n
    ea = network.edge_array
    if len(ea):
        rows = np.concatenate([ea[:, 0], ea[:, 1]])
        cols = np.concatenate([ea[:, 1], ea[:, 0]])
        data = np.ones(len(rows))
        W = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
        W.data[:] = 1.0  # duplicate (i,j)+(j,i) entries summed above; clamp back to binary
    else:
        W = sp.csr_matrix((n, n))
    deg = np.asarray(W.sum(axis=1)).ravel()
    D = sp.diags(deg, format="csr")
    L = (D - W).tocsr()
    return LaplacianTriple(W=W, D=D, L=L)


def _tarjan_components(network: RoadNetwork) -> np.ndarray:
    """Iterative Tarjan SCC. Returns component labels in emission order (sinks first)."""
    n = network.n
    outs = network.out_neighbors
    index = np.full(n, -1, dtype=np.int64)
    lowlink = np.zeros(n, dtype=np.int64)
    on_stack = np.zeros(n, dtype=bool)
    comp = np.full(n, -1, dtype=np.int64)
    stack: list[int] = []
    next_index = 0
    n_comps = 0

    for root in range(n):
        if index[root] != -1:
            continue
        # each work item: (vertex, iterator position into its out list)
        work = [(root, 0)]
        while work:
            v, pi = work.pop()
            if pi == 0:
                index[v] = lowlink[v] = next_index
                next_index += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            for pj in range(pi, len(outs[v])):
                w = outs[v][pj]
                if index[w] == -1:
                    work.append((v, pj + 1))
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    lowlink[v] = min(lowlink[v], index[w])
            if advanced:
                continue
            if lowlink[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = n_comps
                    if w == v:
                        break
                n_comps += 1
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
    return comp


def condense_scc(network: RoadNetwork) -> SccOrdering:
    """Partition vertices into maximal SCCs; the condensed graph is acyclic.

    Component ids are numbered sinks-first, so they already induce a valid
    reverse-topological order over components.
    """
    comp = _tarjan_components(network)
    order = np.array(
        sorted(range(network.n), key=lambda v: (comp[v], v)), dtype=np.int64
    )
    return SccOrdering(order=order, component_of=comp)


def update_ordering(network: RoadNetwork, seed: int | None = None) -> SccOrdering:
    """Reverse-topological vertex order for incremental updates.

    For every cross-SCC edge (i, j), j precedes i. Vertices inside one SCC are
    listed by ascending id; ``seed`` is reserved for an optional randomized
    within-SCC mode and does not affect the default ordering.
    """
    del seed
    return condense_scc(network)
