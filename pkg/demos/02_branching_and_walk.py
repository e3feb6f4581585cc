"""The marked branching process and the walk that dominates it.

Run with ``python3 demos/02_branching_and_walk.py``.
"""

# %%
import numpy as np

from nrgraph import ParetoTail, RngStream, build_weights, oracle
from nrgraph.bp import GammaConfig, overshoot_conditional, run_marked_bp, simulate_walks

spec = ParetoTail.critical(3.5)

# %% explored marks of the thinned process have the law of the cluster of a uniform vertex
ws = build_weights(spec, 4)
gen = RngStream(3).generator()
sizes = np.array([run_marked_bp(ws, gen).t_star for _ in range(50_000)])
emp = np.bincount(sizes, minlength=5)[1:] / sizes.size
exact = oracle.exact_component_laws(ws)[1].as_array(5)[1:]
print("BP   ", np.round(emp, 4))
print("exact", np.round(exact, 4))

# %% stopped walk: gamma, S_gamma and the optional stopping identity
ws = build_weights(ParetoTail.critical(5.0), 1000)
cfg = GammaConfig.for_theorem(1000, 5.0, omega=2.0)
batch = simulate_walks(ws, cfg, RngStream(4), 100_000)
print(cfg, " E(gamma) ~", batch.gamma.mean())
lhs = batch.s_gamma.mean() - 1
rhs = (ws.nu_n - 1) * batch.gamma.mean()
print(f"E S_gamma - 1 = {lhs:.4f}   (nu_n - 1) E gamma = {rhs:.4f}")
r = batch.residuals(ws)
print(f"martingale residual {r.mean():.3f} +- {r.std() / np.sqrt(r.size):.3f}")

# %% overshoot over H is dominated by a Poisson(w_1) tail
tail = overshoot_conditional(ws, GammaConfig(3, 900, 1), RngStream(5), 100_000, k_max=6)
for k, e, p in zip(tail.k, tail.empirical, tail.poisson_tail):
    print(f"k={k}  empirical {e:.4f}  <=  Poisson tail {p:.4f}")
