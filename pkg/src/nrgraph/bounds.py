"""Closed-form quantities on the theorem side.

Everything here is deterministic: moment sums of the weight sequence, the
upper bounds on ``E(gamma)`` and on ``P(|C(V_n)| > k)``, the leading
constants of the two ``|C_max|`` tail bounds, and the limiting degree law.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special
from scipy.stats import poisson

from .bp import GammaConfig
from .dist import (
    DistributionSpec,
    ExplicitQuantile,
    ParetoTail,
    WeightSequence,
    build_weights,
    exact_moments,
)

__all__ = [
    "BOUND_TABLE_COLUMNS",
    "DiagnosticSet",
    "cluster_tail_upper",
    "degree_pmf",
    "diagnostics",
    "egamma_upper",
    "nu_gap_table",
    "theorem1_bound",
    "theorem1_correction_exponent",
    "theorem2_threshold",
    "write_bound_table",
]

BOUND_TABLE_COLUMNS = ("n", "tau", "omega", "H", "Hprime", "k", "bound", "source")


@dataclass(frozen=True)
class DiagnosticSet:
    nu_n: float
    ew2_star: float
    w1: float
    b_H: float
    H: int
    H_prime: int
    k: int


def diagnostics(ws: WeightSequence, cfg: GammaConfig) -> DiagnosticSet:
    """Exact sums entering the ``E(gamma)`` bound; ``b_H = 2H^2 v (E[W*^2] + 1 - nu_n)``."""
    e2 = ws.ew2_star
    b_H = max(2.0 * cfg.H**2, e2 + 1.0 - ws.nu_n)
    return DiagnosticSet(ws.nu_n, e2, ws.w1, b_H, cfg.H, cfg.H_prime, cfg.k)


def egamma_upper(ds: DiagnosticSet) -> float | None:
    """Upper bound on ``E(gamma)``, or None when the bracket is not positive.

    The bracket is ``1 - (1-nu)H/E2 - 2 b_H/(E2 H')`` when ``nu < 1`` and
    ``1 - (nu-1)(H + 3w_1 + w_1^2/H - 1)/E2 - 2 b_H/(E2 H')`` otherwise.
    """
    H, e2, w1 = ds.H, ds.ew2_star, ds.w1
    top = H + 3.0 * w1 + w1 * w1 / H
    gap = 1.0 - ds.nu_n
    tail = 2.0 * ds.b_H / (e2 * ds.H_prime)
    if gap > 0:
        bracket = 1.0 - gap / e2 * H - tail
    else:
        bracket = 1.0 + gap / e2 * (top - 1.0) - tail
    if not bracket > 0:
        return None
    return top / (e2 * bracket)


def cluster_tail_upper(ds: DiagnosticSet, egamma: float) -> float:
    """``(1 - (1-nu_n) E(gamma))/H + E(gamma)/k``; may exceed 1."""
    if egamma < 1:
        raise ValueError(f"E(gamma) >= 1 since gamma >= 1; got {egamma}")
    return (1.0 - (1.0 - ds.nu_n) * egamma) / ds.H + egamma / ds.k


def theorem1_bound(spec: DistributionSpec, omega: float) -> float:
    """Leading term ``2 omega^{-3/2} (EW/EW3 v 1)`` of the ``tau > 4`` tail bound."""
    if not omega > 1:
        raise ValueError(f"omega must exceed 1, got {omega}")
    if isinstance(spec, ParetoTail) and not spec.tau > 4:
        raise ValueError("the tau > 4 bound needs tau > 4")
    mom = exact_moments(spec)
    if not math.isfinite(mom.EW3):
        raise ValueError("E(W^3) must be finite")
    return 2.0 * omega**-1.5 * max(mom.EW / mom.EW3, 1.0)


def theorem1_correction_exponent(tau: float) -> float:
    """``n``-exponent of the ``1 + O(omega^{-1/2} n^{-(tau-4)/(3(tau-1))})`` factor."""
    return (tau - 4.0) / (3.0 * (tau - 1.0))


def theorem2_threshold(n: int, tau: float, omega: float) -> int:
    """``ceil(omega n^{(tau-2)/(tau-1)})``; the constant of that bound is not computed."""
    if not 3 < tau < 4:
        raise ValueError(f"tau must lie in (3, 4), got {tau}")
    if not omega > 1:
        raise ValueError(f"omega must exceed 1, got {omega}")
    if n < 1:
        raise ValueError("n must be positive")
    return math.ceil(omega * n ** ((tau - 2.0) / (tau - 1.0)))


def degree_pmf(spec: DistributionSpec, k_max: int) -> np.ndarray:
    """``p_k = E[exp(-W) W^k / k!]`` for ``k = 0..k_max``.

    The truncation deficit is ``1 - p.sum()``.  Pareto integrals are done by
    adaptive quadrature on the density ``(tau-1) c_F x^{-tau}``.
    """
    ks = np.arange(int(k_max) + 1)
    if isinstance(spec, ExplicitQuantile):
        mass, vals = spec.pieces()
        return np.array([math.fsum(mass * poisson.pmf(k, vals)) for k in ks])
    tau, xm = spec.tau, spec.x_m
    coef = math.log((tau - 1.0) * spec.c_F)

    def integrand(x, k):
        return math.exp(coef - x + (k - tau) * math.log(x) - special.gammaln(k + 1))

    out = np.empty(ks.size)
    for k in ks:
        peak = max(xm, k - tau)
        a, _ = integrate.quad(integrand, xm, peak + 1.0, args=(k,), epsabs=0, epsrel=1e-12, limit=200)
        b, _ = integrate.quad(integrand, peak + 1.0, np.inf, args=(k,), epsabs=0, epsrel=1e-12, limit=200)
        out[k] = a + b
    return out


def nu_gap_table(tau: float, ns) -> list[dict]:
    """Scaled gaps for the critical Pareto law at each ``n``.

    ``nu_scaled = |nu_n - 1| n^{(tau-3)/(tau-1)}`` and, for ``tau > 4``,
    ``m3_scaled = |E[(W_n^*)^2] - EW3/EW| n^{(tau-4)/(tau-1)}``.
    """
    spec = ParetoTail.critical(tau)
    mom = exact_moments(spec)
    rows = []
    for n in ns:
        ws = build_weights(spec, n)
        row = {
            "n": int(n),
            "nu_n": ws.nu_n,
            "nu_scaled": abs(ws.nu_n - 1.0) * n ** ((tau - 3.0) / (tau - 1.0)),
        }
        if tau > 4:
            row["m3_scaled"] = abs(ws.ew2_star - mom.EW3 / mom.EW) * n ** ((tau - 4.0) / (tau - 1.0))
        rows.append(row)
    return rows


def write_bound_table(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.DictWriter(fh, fieldnames=BOUND_TABLE_COLUMNS, lineterminator="\n")
        out.writeheader()
        for r in rows:
            out.writerow({c: r[c] for c in BOUND_TABLE_COLUMNS})
