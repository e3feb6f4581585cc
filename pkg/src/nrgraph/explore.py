"""Component structure of sampled graphs.

``explore_cluster`` follows the active/explored/unseen exploration: at step
``t`` the active vertex with the smallest label is explored and its unseen
neighbours become active, so that ``|U_t| = n - |A_t| - t``.  It is exact and
deterministic given the graph, and slow.  ``components_union_find`` gives
the same component sizes in near-linear time for large ``n``.
"""

from __future__ import annotations

import csv
import heapq
from dataclasses import dataclass

import numba
import numpy as np

from .sampler import GraphSample, as_generator

__all__ = [
    "ComponentSummary",
    "ExplorationTrace",
    "cluster_of_random_vertex",
    "components_union_find",
    "explore_all",
    "explore_cluster",
    "union_find_labels",
]


@dataclass(frozen=True)
class ExplorationTrace:
    """Steps are ``(t, active, unseen, explored)`` from ``t = 0`` to the end."""

    start_vertex: int
    steps: tuple[tuple[int, int, int, int], ...]
    component_size: int

    @property
    def active(self) -> list[int]:
        return [s[1] for s in self.steps]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["t", "active", "unseen", "explored"])
            out.writerows(self.steps)


_UNSEEN, _ACTIVE, _EXPLORED = 0, 1, 2


def explore_cluster(g: GraphSample, v: int, record_trace: bool = True) -> ExplorationTrace:
    """Explore ``C(v)`` until the active set empties."""
    n = g.n
    if not 0 <= v < n:
        raise ValueError(f"vertex {v} outside range({n})")
    status = np.zeros(n, dtype=np.int8)
    status[v] = _ACTIVE
    active = [v]
    n_active, t = 1, 0
    steps = [(0, 1, n - 1, 0)] if record_trace else None
    while n_active:
        t += 1
        m = heapq.heappop(active)
        status[m] = _EXPLORED
        nb = g.neighbours(m)
        new = nb[status[nb] == _UNSEEN]
        status[new] = _ACTIVE
        for u in new.tolist():
            heapq.heappush(active, u)
        n_active += new.size - 1
        if record_trace:
            unseen = n - n_active - t
            assert unseen == int(np.count_nonzero(status == _UNSEEN))
            steps.append((t, n_active, unseen, t))
    return ExplorationTrace(v, tuple(steps) if record_trace else (), t)


def explore_all(g: GraphSample, start: int = 0) -> list[int]:
    """Full exploration with restarts from the smallest unseen label.

    Returns component sizes in discovery order.
    """
    n = g.n
    status = np.zeros(n, dtype=np.int8)
    sizes = []
    nxt = start
    explored = 0
    while explored < n:
        if sizes:
            # restarts take the smallest unseen label
            nxt = int(np.flatnonzero(status == _UNSEEN)[0])
        status[nxt] = _ACTIVE
        active = [nxt]
        size = 0
        while active:
            m = heapq.heappop(active)
            status[m] = _EXPLORED
            size += 1
            nb = g.neighbours(m)
            new = nb[status[nb] == _UNSEEN]
            status[new] = _ACTIVE
            for u in new.tolist():
                heapq.heappush(active, u)
        sizes.append(size)
        explored += size
    return sizes


@dataclass(frozen=True, eq=False)
class ComponentSummary:
    """Component sizes sorted in decreasing order."""

    n: int
    sizes: np.ndarray

    @classmethod
    def from_sizes(cls, n: int, sizes) -> "ComponentSummary":
        s = np.sort(np.asarray(sizes, dtype=np.int64))[::-1].copy()
        if int(s.sum()) != n:
            raise ValueError("component sizes must sum to n")
        s.setflags(write=False)
        return cls(n, s)

    @property
    def c_max(self) -> int:
        return int(self.sizes[0])

    def n_k(self, k: int) -> int:
        """Number of vertices in components of size larger than ``k``."""
        s = self.sizes
        return int(s[s > k].sum())

    def counts(self) -> dict[int, int]:
        vals, cnt = np.unique(self.sizes, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals[::-1], cnt[::-1])}

    def __eq__(self, other):
        if not isinstance(other, ComponentSummary):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.sizes, other.sizes)

    __hash__ = None

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["size", "count"])
            out.writerows(self.counts().items())


@numba.njit(cache=True)
def _uf_find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@numba.njit(cache=True)
def _uf_labels(n, u, v):
    parent = np.arange(n)
    rank = np.zeros(n, dtype=np.int8)
    for e in range(u.size):
        a = _uf_find(parent, u[e])
        b = _uf_find(parent, v[e])
        if a == b:
            continue
        if rank[a] < rank[b]:
            a, b = b, a
        parent[b] = a
        if rank[a] == rank[b]:
            rank[a] += 1
    for x in range(n):
        parent[x] = _uf_find(parent, x)
    return parent


def union_find_labels(g: GraphSample) -> np.ndarray:
    """Root label of each vertex (union by rank with path compression)."""
    return _uf_labels(g.n, g.edges[:, 0].copy(), g.edges[:, 1].copy())


def components_union_find(g: GraphSample) -> ComponentSummary:
    counts = np.bincount(union_find_labels(g), minlength=g.n)
    return ComponentSummary.from_sizes(g.n, counts[counts > 0])


def cluster_of_random_vertex(g: GraphSample, rng=None) -> int:
    """``|C(V_n)|`` for ``V_n`` uniform on the vertex set."""
    gen, _, _ = as_generator(rng)
    v = int(gen.integers(g.n))
    return explore_cluster(g, v, record_trace=False).component_size
