"""Sampling NR_n(w) graphs.

Edge ``{i, j}`` is present independently with probability
``1 - exp(-w_i w_j / l_n)``.  Two samplers realise this law:

``sample_naive``
    one Bernoulli trial per pair; quadratic, the reference.
``sample_poisson_collapse``
    ``K ~ Poisson(l_n / 2)`` ordered pairs ``(I, J)`` with ``I, J`` i.i.d. from
    the mark law ``w_m / l_n``; loops are dropped and multi-edges collapsed.
    The multiplicity of ``{i, j}`` is then exactly ``Poisson(w_i w_j / l_n)``.

Vertices are 0-based throughout.
"""

from __future__ import annotations

import csv
import hashlib
import struct
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .dist import WeightSequence

__all__ = [
    "GraphSample",
    "RngStream",
    "as_generator",
    "degree_histogram",
    "read_graph_binary",
    "sample_naive",
    "sample_poisson_collapse",
    "write_graph_binary",
    "write_graph_csv",
]

NAIVE_MAX_N = 10_000
_MAGIC = b"NRG1"


@dataclass(frozen=True)
class RngStream:
    """Counter-based stream ``(master_seed, stream_id)``.

    The generator depends only on the pair, so replicate ``i`` draws the same
    numbers whichever worker runs it and in whatever order.
    """

    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(ss))


def as_generator(rng) -> tuple[np.random.Generator, int | None, int | None]:
    """Normalise ``rng`` to a Generator plus the (seed, stream) it came from."""
    if isinstance(rng, RngStream):
        return rng.generator(), rng.master_seed, rng.stream_id
    if isinstance(rng, np.random.Generator):
        return rng, None, None
    if rng is None or isinstance(rng, (int, np.integer)):
        s = RngStream(42 if rng is None else int(rng))
        return s.generator(), s.master_seed, s.stream_id
    raise TypeError(f"cannot make a generator from {type(rng).__name__}")


@dataclass(frozen=True, eq=False)
class GraphSample:
    """Simple graph on ``range(n)`` stored as canonical sorted pairs ``i < j``."""

    n: int
    edges: np.ndarray
    method: str
    seed: int | None = None
    stream: int | None = None
    self_loops: int = 0
    collapsed: int = 0
    _checked: bool = field(default=False, repr=False)

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if not self._checked:
            e = np.sort(e, axis=1)
            if e.size and (e[:, 0].min() < 0 or e[:, 1].max() >= self.n):
                raise ValueError("edge endpoint outside range(n)")
            if np.any(e[:, 0] == e[:, 1]):
                raise ValueError("self-loops are not allowed")
            keys = np.unique(e[:, 0] * self.n + e[:, 1])
            if keys.size != len(e):
                raise ValueError("duplicate edges")
            e = np.column_stack((keys // self.n, keys % self.n))
        e.setflags(write=False)
        object.__setattr__(self, "edges", e)

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n)

    @cached_property
    def adjacency(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR ``(indptr, indices)`` with each neighbour list sorted."""
        src = np.concatenate((self.edges[:, 0], self.edges[:, 1]))
        dst = np.concatenate((self.edges[:, 1], self.edges[:, 0]))
        order = np.lexsort((dst, src))
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=self.n), out=indptr[1:])
        return indptr, dst[order]

    def neighbours(self, v: int) -> np.ndarray:
        indptr, idx = self.adjacency
        return idx[indptr[v] : indptr[v + 1]]

    def edge_mask(self) -> int:
        """Bit ``r`` set iff the ``r``-th pair in lexicographic order is present."""
        i, j = self.edges[:, 0], self.edges[:, 1]
        rank = i * (2 * self.n - i - 1) // 2 + (j - i - 1)
        return sum(1 << r for r in rank.tolist())

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(struct.pack("<Q", self.n))
        h.update(self.edges.astype("<u4").tobytes())
        return h.hexdigest()

    def __eq__(self, other):
        if not isinstance(other, GraphSample):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges, other.edges)

    __hash__ = None


def _from_keys(n, keys, method, seed, stream, loops=0, collapsed=0) -> GraphSample:
    e = np.column_stack((keys // n, keys % n))
    return GraphSample(n, e, method, seed, stream, loops, collapsed, _checked=True)


def sample_naive(ws: WeightSequence, rng=None, *, allow_large: bool = False) -> GraphSample:
    """One independent Bernoulli trial per pair.

    Refuses ``n > 10_000`` unless ``allow_large`` is set (quadratic cost).
    """
    n = ws.n
    if n > NAIVE_MAX_N and not allow_large:
        raise ValueError(
            f"sample_naive is quadratic; n={n} exceeds {NAIVE_MAX_N} "
            "(pass allow_large=True or use sample_poisson_collapse)"
        )
    gen, seed, stream = as_generator(rng)
    w = ws.w
    keys = []
    # one row at a time keeps memory linear; row i covers pairs (i, j > i)
    for i in range(n - 1):
        if w[i] == 0.0:
            break  # weights are descending: the rest of the pairs have p = 0
        p = -np.expm1(-w[i] * w[i + 1 :] / ws.l_n)
        hit = np.flatnonzero(gen.random(n - 1 - i) < p)
        if hit.size:
            keys.append(i * n + (hit + i + 1))
    keys = np.concatenate(keys) if keys else np.empty(0, dtype=np.int64)
    return _from_keys(n, keys, "naive", seed, stream)


def sample_poisson_collapse(ws: WeightSequence, rng=None) -> GraphSample:
    """Poisson pair-event construction; expected work ``O(n + l_n)``."""
    n = ws.n
    gen, seed, stream = as_generator(rng)
    k = int(gen.poisson(ws.l_n / 2.0))
    marks = ws.marks.sample(gen, 2 * k).reshape(k, 2)
    a, b = marks[:, 0], marks[:, 1]
    loop = a == b
    lo = np.minimum(a, b)[~loop]
    hi = np.maximum(a, b)[~loop]
    keys = np.unique(lo * n + hi)
    return _from_keys(
        n, keys, "poisson_collapse", seed, stream,
        loops=int(loop.sum()), collapsed=int(lo.size - keys.size),
    )


def degree_histogram(g: GraphSample) -> dict[int, int]:
    counts = np.bincount(g.degrees)
    return {k: int(c) for k, c in enumerate(counts) if c}


def write_graph_csv(g: GraphSample, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["u", "v"])
        out.writerows(g.edges.tolist())


def write_graph_binary(g: GraphSample, path) -> None:
    """``NRG1`` magic, little-endian u64 ``n``, u64 ``m``, then ``m`` u32 pairs."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<QQ", g.n, g.m))
        fh.write(g.edges.astype("<u4").tobytes())


def read_graph_binary(path, method: str = "binary") -> GraphSample:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError(f"{path}: not an NRG1 file")
        n, m = struct.unpack("<QQ", fh.read(16))
        data = np.frombuffer(fh.read(8 * m), dtype="<u4")
    if data.size != 2 * m:
        raise ValueError(f"{path}: truncated edge block")
    return GraphSample(int(n), data.reshape(m, 2).astype(np.int64), method)
