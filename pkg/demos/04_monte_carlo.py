"""Reproducible Monte Carlo experiments and their reports.

Run with ``python3 demos/04_monte_carlo.py``.  The same experiments can be
driven from a JSON file with ``nrgraph verify <config>``.
"""

# %%
from nrgraph import ParetoTail
from nrgraph.bp import GammaConfig
from nrgraph.mc import CmaxTail, Experiment, GammaMean, WalkPositivity, reports_to_csv, run_experiments

spec = ParetoTail.critical(5.0)
exps = [
    Experiment(spec, 10**4, 500, CmaxTail(2.0)),
    Experiment(spec, 1000, 50_000, GammaMean(GammaConfig.for_theorem(1000, 5.0, 2.0))),
    Experiment(ParetoTail.critical(3.5), 4, 20_000, WalkPositivity(3)),
]

# %% results do not depend on the number of workers
reports = run_experiments(exps, workers=1)
for r in reports:
    print(f"{r.quantity:<40} {r.estimate:.4f} +- {r.stderr:.4f}  bound {r.bound_value}  {r.verdict.value}")

# %%
print(reports_to_csv(reports, timing=False))
