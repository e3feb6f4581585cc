"""Weights, marks and the two graph samplers.

Run with ``python3 demos/01_weights_and_samplers.py``.
"""

# %%
import numpy as np

from nrgraph import ParetoTail, RngStream, build_weights, sample_naive, sample_poisson_collapse
from nrgraph.explore import components_union_find

# %% critical Pareto weights: nu_n approaches 1 from below
spec = ParetoTail.critical(3.5)
print(f"c_F = {spec.c_F:.6f}")
for n in (10**2, 10**3, 10**4, 10**5):
    ws = build_weights(spec, n)
    print(f"n={n:>6}  w_1={ws.w1:8.3f}  nu_n={ws.nu_n:.5f}")

# %% marks: the alias table reproduces P(M = j) = w_j / l_n
ws = build_weights(spec, 8)
draws = ws.marks.sample(RngStream(1).generator(), 200_000)
freq = np.bincount(draws, minlength=ws.n) / draws.size
print(np.round(freq, 4))
print(np.round(ws.w / ws.w.sum(), 4))

# %% both samplers agree in law; the collapse sampler scales to large n
small = build_weights(spec, 200)
a = sample_naive(small, RngStream(7))
b = sample_poisson_collapse(small, RngStream(7))
print("naive edges", a.m, " collapse edges", b.m)

big = build_weights(spec, 10**5)
g = sample_poisson_collapse(big, RngStream(7))
s = components_union_find(g)
print(f"n=1e5: {g.m} edges, |C_max| = {s.c_max}, |C_max| / n^(2/3) = {s.c_max / 1e5 ** (2 / 3):.2f}")
