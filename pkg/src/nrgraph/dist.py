"""Weight distributions, the weight sequence and the size-biased mark law.

Vertex weights are built from a distribution function ``F`` through the
generalized inverse of its survival function,

    w_j = [1 - F]^{-1}(j / n),   [1 - F]^{-1}(u) = inf{s : 1 - F(s) <= u},

with the convention ``[1 - F]^{-1}(1) = 0``.  Consequently ``w_n = 0`` for
every distribution: the last vertex is isolated almost surely.

Two families of ``F`` are supported:

* :class:`ParetoTail` -- ``1 - F(x) = min(1, c_F x^{-(tau-1)})``, i.e. a Pareto
  law with scale ``x_m = c_F^{1/(tau-1)}``;
* :class:`ExplicitQuantile` -- a tabulated, non-increasing step quantile.
"""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Union

import numpy as np

__all__ = [
    "AliasTable",
    "DistributionSpec",
    "ExplicitQuantile",
    "MomentSet",
    "ParetoTail",
    "WeightSequence",
    "build_weights",
    "critical_cF",
    "empirical_df",
    "exact_moments",
    "quantile",
    "read_weights_csv",
    "size_biased_sampler",
    "write_weights_csv",
]


def _check_u(u: float) -> float:
    u = float(u)
    if not (0.0 < u <= 1.0):
        raise ValueError(f"u must lie in (0, 1], got {u!r}")
    return u


@dataclass(frozen=True)
class ParetoTail:
    """Pareto distribution with ``1 - F(x) = c_F x^{-(tau-1)}`` for ``x >= x_m``.

    Below ``x_m = c_F^{1/(tau-1)}`` the survival function is 1, which is the
    only reading of the pure power law that is a distribution function.  It
    leaves every weight ``[1-F]^{-1}(j/n)`` unchanged.
    """

    tau: float
    c_F: float

    def __post_init__(self):
        if not self.tau > 3:
            raise ValueError(f"tau must exceed 3, got {self.tau!r}")
        if not self.c_F > 0:
            raise ValueError(f"c_F must be positive, got {self.c_F!r}")

    @classmethod
    def critical(cls, tau: float) -> "ParetoTail":
        return cls(tau, critical_cF(tau))

    @property
    def x_m(self) -> float:
        return self.c_F ** (1.0 / (self.tau - 1.0))

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            s = self.c_F * np.power(np.where(x > 0, x, 0.0), -(self.tau - 1.0))
        return np.minimum(1.0, s)

    def quantile(self, u: float) -> float:
        u = _check_u(u)
        if u == 1.0:
            return 0.0
        return max(self.x_m, (self.c_F / u) ** (1.0 / (self.tau - 1.0)))

    def quantiles(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if np.any((u <= 0) | (u > 1)):
            raise ValueError("all u must lie in (0, 1]")
        q = np.maximum(self.x_m, (self.c_F / u) ** (1.0 / (self.tau - 1.0)))
        q[u == 1.0] = 0.0
        return q


@dataclass(frozen=True)
class ExplicitQuantile:
    """Tabulated ``[1-F]^{-1}`` as a left-continuous step function.

    ``levels`` are strictly increasing knots in (0, 1] ending at 1 and
    ``values`` the non-increasing quantile on each interval
    ``(levels[k-1], levels[k]]`` (with ``levels[-1] = 0``).  The value at
    ``u = 1`` is always 0 regardless of ``values[-1]``.
    """

    levels: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        lv = tuple(float(x) for x in self.levels)
        vv = tuple(float(x) for x in self.values)
        object.__setattr__(self, "levels", lv)
        object.__setattr__(self, "values", vv)
        if not lv or len(lv) != len(vv):
            raise ValueError("levels and values must be non-empty and of equal length")
        if lv[-1] != 1.0 or lv[0] <= 0.0:
            raise ValueError("levels must lie in (0, 1] and end at 1")
        if any(a >= b for a, b in zip(lv, lv[1:])):
            raise ValueError("levels must be strictly increasing")
        if any(v < 0 for v in vv) or any(a < b for a, b in zip(vv, vv[1:])):
            raise ValueError("values must be non-negative and non-increasing")

    def quantile(self, u: float) -> float:
        u = _check_u(u)
        if u == 1.0:
            return 0.0
        return self.values[bisect.bisect_left(self.levels, u)]

    def quantiles(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if np.any((u <= 0) | (u > 1)):
            raise ValueError("all u must lie in (0, 1]")
        q = np.asarray(self.values)[np.searchsorted(self.levels, u, side="left")]
        q[u == 1.0] = 0.0
        return q

    def pieces(self) -> tuple[np.ndarray, np.ndarray]:
        """Interval masses and values: ``W`` equals ``values[k]`` w.p. ``mass[k]``."""
        lv = np.asarray(self.levels)
        return np.diff(lv, prepend=0.0), np.asarray(self.values)


DistributionSpec = Union[ParetoTail, ExplicitQuantile]


def quantile(spec: DistributionSpec, u: float) -> float:
    """Generalized inverse ``[1-F]^{-1}(u)`` for ``u`` in (0, 1]."""
    return spec.quantile(u)


def critical_cF(tau: float) -> float:
    """The unique ``c_F`` making a Pareto tail critical (``nu = 1``).

    ``nu = x_m (tau-2)/(tau-3)``, so ``x_m = (tau-3)/(tau-2)`` and
    ``c_F = x_m^{tau-1}``.
    """
    if not tau > 3:
        raise ValueError(f"tau must exceed 3, got {tau!r}")
    return ((tau - 3.0) / (tau - 2.0)) ** (tau - 1.0)


@dataclass(frozen=True)
class MomentSet:
    EW: float
    EW2: float
    EW3: float

    @property
    def nu(self) -> float:
        return self.EW2 / self.EW


def exact_moments(spec: DistributionSpec) -> MomentSet:
    """First three moments of ``W ~ F``; ``EW3`` is ``inf`` when ``tau <= 4``."""
    if isinstance(spec, ParetoTail):
        t, x = spec.tau, spec.x_m
        ew3 = x**3 * (t - 1) / (t - 4) if t > 4 else math.inf
        return MomentSet(x * (t - 1) / (t - 2), x**2 * (t - 1) / (t - 3), ew3)
    mass, vals = spec.pieces()
    return MomentSet(*(math.fsum(mass * vals**k) for k in (1, 2, 3)))


@dataclass(frozen=True, eq=False)
class WeightSequence:
    """Descending vertex weights with cached power sums.

    ``w`` is stored read-only.  ``l_n``, ``m2`` and ``m3`` are computed with
    compensated summation.
    """

    w: np.ndarray
    l_n: float = field(init=False)
    m2: float = field(init=False)
    m3: float = field(init=False)

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("weights must be a non-empty 1-d sequence")
        if np.any(~np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and non-negative")
        if np.any(np.diff(w) > 0):
            raise ValueError("weights must be non-increasing")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        lst = w.tolist()
        object.__setattr__(self, "l_n", math.fsum(lst))
        object.__setattr__(self, "m2", math.fsum(x * x for x in lst))
        object.__setattr__(self, "m3", math.fsum(x * x * x for x in lst))
        if not self.l_n > 0:
            raise ValueError("total weight l_n must be positive")

    @property
    def n(self) -> int:
        return self.w.size

    @property
    def nu_n(self) -> float:
        """``sum w_i^2 / sum w_i``; the mean of the size-biased weight."""
        return self.m2 / self.l_n

    @property
    def ew2_star(self) -> float:
        """``E[(W_n^*)^2] = sum w_i^3 / sum w_i``."""
        return self.m3 / self.l_n

    @property
    def w1(self) -> float:
        return float(self.w[0])

    @cached_property
    def marks(self) -> "AliasTable":
        return AliasTable(self.w)

    def edge_probability(self, i: int, j: int) -> float:
        return -math.expm1(-self.w[i] * self.w[j] / self.l_n)

    def __repr__(self):
        return f"WeightSequence(n={self.n}, l_n={self.l_n:.6g}, nu_n={self.nu_n:.6g})"


def build_weights(spec: DistributionSpec, n: int) -> WeightSequence:
    """``w_j = [1-F]^{-1}(j/n)`` for ``j = 1..n`` (0-based position ``j-1``)."""
    n = int(n)
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    u = np.arange(1, n + 1, dtype=float) / n
    u[-1] = 1.0
    return WeightSequence(spec.quantiles(u))


def empirical_df(ws: WeightSequence, x: float) -> float:
    """``F_n(x) = #{i : w_i <= x} / n``."""
    # w is descending; count of entries <= x is n minus count of entries > x
    above = np.searchsorted(-ws.w, -x, side="left")
    return (ws.n - int(above)) / ws.n


class AliasTable:
    """Walker/Vose alias table for ``P(M = m) = w_m / sum(w)``."""

    def __init__(self, weights):
        w = np.asarray(weights, dtype=float)
        total = math.fsum(w.tolist())
        if w.size == 0 or not total > 0:
            raise ValueError("alias table needs at least one positive weight")
        n = w.size
        self.probabilities = w / total
        scaled = self.probabilities * n
        prob = np.ones(n)
        alias = np.arange(n)
        small = [i for i in range(n) if scaled[i] < 1.0]
        large = [i for i in range(n) if scaled[i] >= 1.0]
        scaled = scaled.tolist()
        while small and large:
            s = small.pop()
            g = large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] = (scaled[g] + scaled[s]) - 1.0
            (small if scaled[g] < 1.0 else large).append(g)
        # leftovers are 1 up to rounding
        self.prob = prob
        self.alias = alias
        self.n = n

    def sample(self, rng: np.random.Generator, size=None):
        """Draw marks (0-based indices)."""
        if size is None:
            i = int(rng.integers(self.n))
            return i if rng.random() < self.prob[i] else int(self.alias[i])
        i = rng.integers(self.n, size=size)
        keep = rng.random(size) < self.prob[i]
        return np.where(keep, i, self.alias[i])

    def implied_probabilities(self) -> np.ndarray:
        """Probabilities encoded by the table, for checking the construction."""
        p = self.prob / self.n
        out = p.copy()
        np.add.at(out, self.alias, (1.0 - self.prob) / self.n)
        return out


def size_biased_sampler(ws: WeightSequence) -> AliasTable:
    """Constant-time sampler of the mark law ``P(M = m) = w_m / l_n``."""
    return ws.marks


def write_weights_csv(ws: WeightSequence, path) -> None:
    """Columns ``index,weight`` with 1-based rank ``index`` (``w_index``)."""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["index", "weight"])
        for j, x in enumerate(ws.w.tolist(), start=1):
            out.writerow([j, repr(x)])


def read_weights_csv(path) -> WeightSequence:
    with open(Path(path), newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or set(rows[0]) != {"index", "weight"}:
        raise ValueError(f"{path}: expected columns index,weight")
    rows.sort(key=lambda r: int(r["index"]))
    if [int(r["index"]) for r in rows] != list(range(1, len(rows) + 1)):
        raise ValueError(f"{path}: indices must be 1..n")
    return WeightSequence(np.array([float(r["weight"]) for r in rows]))
