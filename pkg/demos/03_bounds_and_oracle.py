"""Closed-form bounds next to exact small-graph laws.

Run with ``python3 demos/03_bounds_and_oracle.py``.
"""

# %%
import numpy as np

from nrgraph import ParetoTail, build_weights, oracle
from nrgraph.bounds import (
    cluster_tail_upper,
    degree_pmf,
    diagnostics,
    egamma_upper,
    nu_gap_table,
    theorem1_bound,
    theorem2_threshold,
)
from nrgraph.bp import GammaConfig

# %% finite-n cluster tail bound against the exact law at n = 5
# the bound is sound but loose this small; at tau = 3.5 the E(gamma) bracket is not even positive
ws = build_weights(ParetoTail.critical(5.0), 5)
exact = oracle.exact_component_laws(ws)[1]
for k in (1, 2, 3, 4):
    ds = diagnostics(ws, GammaConfig(1, 100, k))
    eg = egamma_upper(ds)
    bound = "vacuous" if eg is None else f"{cluster_tail_upper(ds, eg):.4f}"
    print(f"k={k}  P(|C(V)| > k) = {exact.tail(k):.4f}   bound {bound}")

# %% asymptotic statements
print(f"tau=5: leading C_max tail at omega=4 is {theorem1_bound(ParetoTail.critical(5.0), 4.0):.4f}")
print("threshold at n=1e6, tau=3.5, omega=4:", theorem2_threshold(10**6, 3.5, 4.0))

# %% limiting degree law and the rate at which nu_n approaches 1
p = degree_pmf(ParetoTail.critical(5.0), 10)
print("p_0..p_10", np.round(p, 4))
for row in nu_gap_table(4.5, [10**2, 10**3, 10**4]):
    print(row)
