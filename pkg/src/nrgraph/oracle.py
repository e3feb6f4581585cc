"""Brute-force ground truth for tiny graphs (n <= 6).

Every subset of the ``C(n, 2)`` pairs is enumerated under the product law;
probabilities are accumulated in log space so tiny ``p_ij`` do not underflow.
Graph ``mask`` bit ``r`` refers to the ``r``-th pair in lexicographic order,
matching :meth:`GraphSample.edge_mask`.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dist import WeightSequence

__all__ = [
    "ExactLaw",
    "MAX_ORACLE_N",
    "exact_component_laws",
    "exact_edge_marginals",
    "exact_graph_law",
]

MAX_ORACLE_N = 6


@dataclass(frozen=True)
class ExactLaw:
    support: tuple[int, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if any(p < 0 for p in self.probs) or abs(sum(self.probs) - 1.0) > 1e-12:
            raise ValueError("probabilities must be non-negative and sum to 1")

    def prob(self, value: int) -> float:
        return dict(zip(self.support, self.probs)).get(value, 0.0)

    def tail(self, k: int) -> float:
        """``P(X > k)``."""
        return float(sum(p for s, p in zip(self.support, self.probs) if s > k))

    def as_array(self, size: int) -> np.ndarray:
        out = np.zeros(size)
        for s, p in zip(self.support, self.probs):
            out[s] = p
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["value", "prob"])
            out.writerows((s, repr(p)) for s, p in zip(self.support, self.probs))


def _check_n(n: int) -> None:
    if n > MAX_ORACLE_N:
        raise ValueError(f"exact enumeration refused for n={n} > {MAX_ORACLE_N}")


def exact_edge_marginals(ws: WeightSequence) -> np.ndarray:
    """Matrix of ``p_ij = 1 - exp(-w_i w_j / l_n)`` with zero diagonal."""
    _check_n(ws.n)
    p = -np.expm1(-np.outer(ws.w, ws.w) / ws.l_n)
    np.fill_diagonal(p, 0.0)
    return p


@lru_cache(maxsize=None)
def _structure(n: int):
    """Pair list, 0/1 design matrix over masks, and component sizes per mask."""
    pairs = list(itertools.combinations(range(n), 2))
    masks = np.arange(1 << len(pairs))
    bits = (masks[:, None] >> np.arange(len(pairs))) & 1
    comp = []
    for row in bits:
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for r, (i, j) in enumerate(pairs):
            if row[r]:
                parent[find(i)] = find(j)
        roots = [find(x) for x in range(n)]
        comp.append(np.bincount(roots, minlength=n)[roots])  # |C(v)| per vertex
    return pairs, bits.astype(bool), np.array(comp)


def exact_graph_law(ws: WeightSequence) -> np.ndarray:
    """Probability of every graph, indexed by edge mask."""
    _check_n(ws.n)
    pairs, bits, _ = _structure(ws.n)
    p = exact_edge_marginals(ws)
    pv = np.array([p[i, j] for i, j in pairs])
    with np.errstate(divide="ignore"):
        log_on, log_off = np.log(pv), np.log1p(-pv)
    # 0 * -inf must count as 0, so select instead of multiplying
    logp = np.where(bits, log_on, log_off).sum(axis=1)
    return np.exp(logp)


def _law(values: np.ndarray, probs: np.ndarray) -> ExactLaw:
    support = np.unique(values)
    mass = np.array([probs[values == s].sum() for s in support])
    keep = mass > 0
    mass = mass[keep]
    return ExactLaw(tuple(int(s) for s in support[keep]), tuple(float(x) for x in mass))


def exact_component_laws(ws: WeightSequence) -> tuple[ExactLaw, ExactLaw]:
    """Exact laws of ``|C_max|`` and of ``|C(V_n)|`` with ``V_n`` uniform."""
    n = ws.n
    _check_n(n)
    _, _, comp = _structure(n)
    g = exact_graph_law(ws)
    cmax = _law(comp.max(axis=1), g)
    # uniform vertex: each graph contributes 1/n per vertex
    vals = comp.ravel()
    cluster = _law(vals, np.repeat(g / n, n))
    return cmax, cluster
