"""Marked mixed-Poisson branching process and its dominating random walk.

The cluster of a uniform vertex is explored through a branching process
whose individuals carry marks in ``range(n)``.  The root mark is uniform;
an individual with mark ``m`` has ``Poisson(w_m)`` children whose marks are
i.i.d. from ``P(M = j) = w_j / l_n``.  Children whose mark has been seen
before are thinned.  The explored marks at the extinction time ``T*`` have
the law of ``C(V_n)``.

Dropping the thinning and replacing the first offspring count by a
size-biased one gives the i.i.d. walk ``S_t = 1 + sum_{i<=t} (Y_i - 1)``
with ``Y_i ~ Poisson(w_M)``, which dominates the exploration.  The walk is
stopped at ``gamma``, the first ``t < H'`` with ``S_t = 0`` or ``S_t >= H``
(``gamma = H'`` if there is none).
"""

from __future__ import annotations

import csv
import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from .dist import WeightSequence
from .sampler import as_generator

__all__ = [
    "BpTrace",
    "GammaConfig",
    "OvershootTail",
    "WalkBatch",
    "WalkPath",
    "martingale_residual",
    "overshoot_conditional",
    "run_marked_bp",
    "run_walk",
    "sample_offspring",
    "simulate_walks",
]

# (generator, size) -> integer offspring counts; used to stub the walk in tests
Offspring = Callable[[np.random.Generator, int], np.ndarray]


def sample_offspring(ws: WeightSequence, rng=None, size=None):
    """Mixed Poisson draw(s) ``Poisson(w_M)`` with ``M`` from the mark law."""
    gen, _, _ = as_generator(rng)
    marks = ws.marks.sample(gen, size)
    return gen.poisson(ws.w[marks])


@dataclass(frozen=True)
class BpTrace:
    """One thinned exploration.  ``steps[t-1] = (offspring, new_marks)``."""

    initial_mark: int
    steps: tuple[tuple[int, int], ...]
    t_star: int | None
    explored_marks: int

    @property
    def censored(self) -> bool:
        return self.t_star is None

    def active_counts(self, thinned: bool = True) -> list[int]:
        """``1 + sum (count - 1)`` after each step, thinned or not."""
        col = 1 if thinned else 0
        out, a = [], 1
        for s in self.steps:
            a += s[col] - 1
            out.append(a)
        return out

    def write_csv(self, path) -> None:
        """Columns ``step,value``; value is the thinned active count, from step 0."""
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["step", "value"])
            out.writerows(enumerate([1] + self.active_counts()))


def run_marked_bp(ws: WeightSequence, rng=None, cap: int | None = None) -> BpTrace:
    """Run the thinned marked process until no active marks remain.

    Censored after ``cap`` steps (default ``10 n``); then ``t_star`` is None.
    Since every step explores a distinct mark, ``T* <= n`` and the default
    cap never binds.
    """
    gen, _, _ = as_generator(rng)
    n = ws.n
    cap = 10 * n if cap is None else int(cap)
    if cap < 1:
        raise ValueError("cap must be positive")
    w = ws.w
    table = ws.marks
    j0 = int(gen.integers(n))
    seen = {j0}
    active = [j0]
    steps = []
    t = 0
    while active:
        if t >= cap:
            return BpTrace(j0, tuple(steps), None, t)
        t += 1
        m = heapq.heappop(active)
        x = int(gen.poisson(w[m]))
        new = 0
        if x:
            for j in table.sample(gen, x).tolist():
                if j not in seen:
                    seen.add(j)
                    heapq.heappush(active, j)
                    new += 1
        steps.append((x, new))
    return BpTrace(j0, tuple(steps), t, t)


def _floor(x: float) -> int:
    # 1000 ** (1/3) is 9.999...; forgive a few ulps before flooring
    return math.floor(x * (1 + 1e-12))


@dataclass(frozen=True)
class GammaConfig:
    """Stopping data: level ``H``, horizon ``H'`` and cluster threshold ``k``."""

    H: int
    H_prime: int
    k: int

    def __post_init__(self):
        if self.H < 1 or self.k < 1:
            raise ValueError("H and k must be positive")
        if self.H_prime < self.k:
            raise ValueError(f"H' ({self.H_prime}) must be at least k ({self.k})")

    @classmethod
    def for_theorem(cls, n: int, tau: float, omega: float, delta: float = 0.1,
                    horizon_factor: int = 100) -> "GammaConfig":
        """Defaults from the proofs.

        ``tau > 4``: ``H = floor(sqrt(omega) n^{1/3})``, ``k = H^2``.
        ``3 < tau < 4``: ``H = floor(delta n^{1/(tau-1)})`` and
        ``k = floor(omega / delta * H^{tau-2})``.  ``H`` is clamped to 1 and
        ``H' = max(horizon_factor * H^2, k)``.
        """
        if tau > 4:
            H = max(1, _floor(math.sqrt(omega) * n ** (1 / 3)))
            k = H * H
        elif 3 < tau < 4:
            H = max(1, _floor(delta * n ** (1 / (tau - 1))))
            k = max(1, _floor(omega / delta * H ** (tau - 2)))
        else:
            raise ValueError(f"no default stopping data for tau={tau}")
        return cls(H, max(horizon_factor * H * H, k), k)


@dataclass(frozen=True)
class WalkPath:
    upsilon: tuple[int, ...]
    s: tuple[int, ...]
    gamma: int
    s_gamma: int
    k: int
    positive_through_k: bool

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["step", "value"])
            out.writerows(enumerate(self.s))


def _first_step_draw(ws, gen, size, dominate_first_step):
    if dominate_first_step:
        return gen.poisson(ws.w[ws.marks.sample(gen, size)])
    return gen.poisson(ws.w[gen.integers(ws.n, size=size)])


def run_walk(ws: WeightSequence, cfg: GammaConfig, rng=None,
             dominate_first_step: bool = True, offspring: Offspring | None = None) -> WalkPath:
    """One walk path, run until both ``gamma`` and positivity up to ``k`` are known.

    With ``dominate_first_step`` false the first increment uses the uniform
    root mark, i.e. the undominated first generation of the process.
    """
    gen, _, _ = as_generator(rng)
    H, Hp, k = cfg.H, cfg.H_prime, cfg.k
    ups, s = [], [1]
    gamma = None
    positive = True
    t = 0
    while gamma is None or (positive and t < k):
        t += 1
        if offspring is not None:
            y = int(offspring(gen, 1)[0])
        elif t == 1:
            y = int(_first_step_draw(ws, gen, 1, dominate_first_step)[0])
        else:
            y = int(gen.poisson(ws.w[ws.marks.sample(gen)]))
        ups.append(y)
        st = s[-1] + y - 1
        s.append(st)
        if gamma is None and ((t < Hp and (st == 0 or st >= H)) or t == Hp):
            gamma = t
        if t <= k and st <= 0:
            positive = False
    return WalkPath(tuple(ups), tuple(s), gamma, s[gamma], k, positive)


def martingale_residual(ws: WeightSequence, path: WalkPath) -> float:
    """``M_gamma - M_0`` for ``M_t = S_t^2 + t[nu-1-E(W*^2)] - 2(nu-1) sum_{j<t} S_j``."""
    nu, e2 = ws.nu_n, ws.ew2_star
    g = path.gamma
    sg = path.s[g]
    return sg * sg + g * (nu - 1.0 - e2) - 2.0 * (nu - 1.0) * sum(path.s[:g]) - 1.0


@dataclass(frozen=True, eq=False)
class WalkBatch:
    """Per-replicate outcomes of independent walks."""

    gamma: np.ndarray
    s_gamma: np.ndarray
    sum_before_gamma: np.ndarray
    positive: np.ndarray
    cfg: GammaConfig

    def __len__(self):
        return self.gamma.size

    def residuals(self, ws: WeightSequence) -> np.ndarray:
        nu, e2 = ws.nu_n, ws.ew2_star
        sg = self.s_gamma.astype(float)
        return (sg * sg + self.gamma * (nu - 1.0 - e2)
                - 2.0 * (nu - 1.0) * self.sum_before_gamma - 1.0)


def simulate_walks(ws: WeightSequence, cfg: GammaConfig, rng, replicates: int,
                   dominate_first_step: bool = True,
                   offspring: Offspring | None = None) -> WalkBatch:
    """Vectorised :func:`run_walk` over ``replicates`` independent paths."""
    gen, _, _ = as_generator(rng)
    H, Hp, k = cfg.H, cfg.H_prime, cfg.k
    R = int(replicates)
    S = np.ones(R, dtype=np.int64)
    gamma = np.zeros(R, dtype=np.int64)
    s_gamma = np.zeros(R, dtype=np.int64)
    acc = np.zeros(R, dtype=np.int64)
    positive = np.ones(R, dtype=bool)
    done = np.zeros(R, dtype=bool)
    ids = np.arange(R)
    w, table = ws.w, ws.marks
    t = 0
    while ids.size:
        t += 1
        if offspring is not None:
            y = np.asarray(offspring(gen, ids.size), dtype=np.int64)
        elif t == 1:
            y = _first_step_draw(ws, gen, ids.size, dominate_first_step)
        else:
            y = gen.poisson(w[table.sample(gen, ids.size)])
        open_ = ~done[ids]
        acc[ids[open_]] += S[ids[open_]]
        S[ids] += y - 1
        st = S[ids]
        if t < Hp:
            hit = open_ & ((st == 0) | (st >= H))
        else:
            hit = open_
        hid = ids[hit]
        gamma[hid] = t
        s_gamma[hid] = st[hit]
        done[hid] = True
        if t <= k:
            positive[ids] &= st > 0
        keep = ~done[ids] | (positive[ids] & (t < k))
        ids = ids[keep]
    return WalkBatch(gamma, s_gamma, acc, positive, cfg)


@dataclass(frozen=True, eq=False)
class OvershootTail:
    """``P(S_gamma - H >= k | S_gamma >= H)`` against ``P(Poisson(w_1) >= k)``."""

    k: np.ndarray
    empirical: np.ndarray
    stderr: np.ndarray
    poisson_tail: np.ndarray
    conditioned: int

    @property
    def flagged(self) -> bool:
        """No replicate reached ``H``; the conditional tail is undefined."""
        return self.conditioned == 0


def overshoot_tail(batch: WalkBatch, w1: float, k_max: int = 10) -> OvershootTail:
    H = batch.cfg.H
    over = batch.s_gamma[batch.s_gamma >= H] - H
    ks = np.arange(k_max + 1)
    m = over.size
    if m:
        emp = np.array([np.count_nonzero(over >= k) for k in ks]) / m
        se = np.sqrt(emp * (1 - emp) / m)
    else:
        emp = np.full(ks.size, np.nan)
        se = np.full(ks.size, np.nan)
    return OvershootTail(ks, emp, se, stats.poisson.sf(ks - 1, w1), m)


def overshoot_conditional(ws: WeightSequence, cfg: GammaConfig, rng, replicates: int,
                          k_max: int = 10, offspring: Offspring | None = None) -> OvershootTail:
    """Empirical overshoot tail over ``replicates`` walks."""
    if replicates < 1:
        raise ValueError("need at least one replicate")
    batch = simulate_walks(ws, cfg, rng, replicates, offspring=offspring)
    return overshoot_tail(batch, ws.w1, k_max)
