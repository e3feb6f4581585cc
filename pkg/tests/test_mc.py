import json
import math

import numpy as np
import pytest

from nrgraph import mc, oracle
from nrgraph.bp import GammaConfig
from nrgraph.dist import ParetoTail
from nrgraph.mc import (
    ClusterTail,
    CmaxTail,
    DegreeTV,
    Experiment,
    GammaMean,
    McReport,
    OptionalStopping,
    Overshoot,
    Prop24TV,
    SamplerTV,
    Verdict,
    WalkPositivity,
    binomial_ci,
    dominance_check,
    experiment_from_dict,
    experiment_to_dict,
    run_experiment,
)
from nrgraph.sampler import RngStream

S35 = ParetoTail.critical(3.5)
S5 = ParetoTail.critical(5.0)


def report(est, se, bound=None):
    v = mc._verdict(est, se, bound)
    return McReport("x", est, se, (est - 2 * se, est + 2 * se), bound, v, 0.0, 0.0, 100)


class TestIntervals:
    def test_zero_events(self):
        est, se, lo, hi = binomial_ci(0, 10_000)
        assert est == 0 and lo == 0
        assert hi == pytest.approx(1 - 0.025 ** (1 / 10_000))
        assert hi * 10_000 == pytest.approx(3.7, abs=0.02)

    def test_all_events(self):
        est, _, lo, hi = binomial_ci(500, 500)
        assert est == 1 and hi == 1 and lo == pytest.approx(0.025 ** (1 / 500))

    def test_zero_event_report(self):
        # omega so large that no replicate reaches the threshold
        r = run_experiment(Experiment(S5, 200, 10_000, CmaxTail(1e6)))
        assert r.estimate == 0 and r.ci95[0] == 0
        assert r.ci95[1] * 10_000 == pytest.approx(3.7, abs=0.02)
        assert r.verdict is Verdict.BOUND_HOLDS

    def test_coverage(self):
        gen = RngStream(99).generator()
        R, p = 1000, 0.3
        hits = gen.binomial(R, p, size=1000)
        cover = 0
        for x in hits:
            _, _, lo, hi = binomial_ci(int(x), R)
            cover += lo <= p <= hi
        assert 0.93 <= cover / 1000 <= 0.97


class TestVerdicts:
    def test_three_sigma(self):
        assert report(0.13, 0.004, 0.12).verdict is Verdict.BOUND_HOLDS
        assert report(0.14, 0.004, 0.12).verdict is Verdict.BOUND_VIOLATED
        assert report(0.5, 0.01, None).verdict is Verdict.INFORMATIONAL

    def test_dominance(self):
        assert dominance_check(report(0.10, 0.003), 0.12) is Verdict.BOUND_HOLDS
        assert dominance_check(report(0.20, 0.003), 0.12) is Verdict.BOUND_VIOLATED
        assert dominance_check(report(0.13, 0.003), report(0.12, 0.003)) is Verdict.BOUND_HOLDS
        assert dominance_check(0.3, 0.2) is Verdict.BOUND_VIOLATED

    def test_exact_vs_walk_positivity(self, crit35_n4):
        law = oracle.exact_component_laws(crit35_n4)[1]
        for k in range(1, 11):
            r = run_experiment(Experiment(S35, 4, 20_000, WalkPositivity(k)))
            assert dominance_check(law.tail(k), r) is Verdict.BOUND_HOLDS

    def test_censoring_downgrades(self):
        e = Experiment(S35, 4, 1000, Prop24TV())
        rec = mc._simulate(e, mc._sim_kind(e), 1000, 1)
        rec["censored"][:20] = True
        r = mc._assemble(e, rec)
        assert r.censored_fraction == 0.02 and r.verdict is Verdict.INFORMATIONAL

    def test_violation_reruns(self):
        e = Experiment(S5, 10, 1000, Overshoot(GammaConfig(2, 100, 1), 0))
        assert run_experiment(e).verdict is Verdict.BOUND_HOLDS  # both tails are 1 at k = 0
        # force a violation to check the single re-run at 4R
        calls = []
        real = mc._simulate

        def spy(exp, kind, R, workers):
            calls.append(R)
            return real(exp, kind, R, workers)

        mp = pytest.MonkeyPatch()
        mp.setattr(mc, "_simulate", spy)
        mp.setattr(mc, "_assemble", lambda exp, rec: report(1.0, 0.0, 0.5))
        try:
            r = run_experiment(e)
        finally:
            mp.undo()
        assert calls == [1000, 4000] and r.details["rerun"]


class TestExperiments:
    def test_cluster_tail_oracle(self, crit35_n4):
        r = run_experiment(Experiment(S35, 4, 100_000, ClusterTail(2)))
        exact = oracle.exact_component_laws(crit35_n4)[1].tail(2)
        assert abs(r.estimate - exact) <= 3 * r.stderr
        assert r.details["exact"] == exact

    def test_report_invariants(self):
        cfg = GammaConfig.for_theorem(1000, 5, 2)
        exps = [Experiment(S5, 1000, 500, CmaxTail(2)),
                Experiment(S5, 1000, 5000, GammaMean(cfg)),
                Experiment(S5, 1000, 5000, Overshoot(cfg, 1)),
                Experiment(S5, 1000, 5000, OptionalStopping(cfg)),
                Experiment(S5, 1000, 1, DegreeTV(20))]
        for r in mc.run_experiments(exps):
            lo, hi = r.ci95
            assert lo <= r.estimate <= hi
            if r.verdict is Verdict.BOUND_VIOLATED:
                assert r.estimate - 3 * r.stderr > r.bound_value

    def test_workers_identical(self):
        e = Experiment(S5, 2000, 600, CmaxTail(2))
        a = run_experiment(e, workers=1).to_json(timing=False)
        b = run_experiment(e, workers=3).to_json(timing=False)
        assert a == b

    def test_validation(self):
        with pytest.raises(ValueError):
            Experiment(S5, 100, 99, CmaxTail(2))
        with pytest.raises(ValueError):
            Experiment(S5, 100, 100, CmaxTail(1))
        with pytest.raises(ValueError):
            Experiment(S35, 7, 100, Prop24TV())
        with pytest.raises(ValueError):
            Experiment(S5, 3, 100, CmaxTail(2), weights=(1.0, 1.0))

    def test_resource_guard(self):
        with pytest.raises(mc.ResourceRefused):
            mc.check_resources(Experiment(S5, 10**9, 100, CmaxTail(2)))
        with pytest.raises(mc.ResourceRefused):
            mc.check_resources(Experiment(S5, 10**7, 1000, CmaxTail(2)))


class TestSerialisation:
    def test_json_round_trip(self):
        r = run_experiment(Experiment(S35, 4, 1000, SamplerTV("naive")))
        d = json.loads(r.to_json())
        for f in ("estimate", "stderr", "ci95", "bound_value", "verdict", "runtime_s", "censored_fraction"):
            assert f in d
        back = McReport.from_dict(d)
        assert back.to_json() == r.to_json()

    def test_nan_is_null(self):
        r = report(math.nan, math.nan)
        assert json.loads(r.to_json())["estimate"] is None

    def test_csv(self):
        text = mc.reports_to_csv([report(0.1, 0.01, 0.2)], timing=False)
        head = text.splitlines()[0].split(",")
        assert "runtime_s" not in head and head[0] == "quantity"

    @pytest.mark.parametrize("q", [
        {"kind": "CmaxTail", "omega": 2},
        {"kind": "ClusterTail", "k": 3},
        {"kind": "WalkPositivity", "k": 3},
        {"kind": "GammaMean", "H": 3, "H_prime": 30, "k": 2},
        {"kind": "Overshoot", "omega": 2, "tail_k": 2},
        {"kind": "OptionalStopping", "H": 3, "H_prime": 30, "k": 2, "identity": "martingale"},
        {"kind": "DegreeTV", "k_max": 20},
        {"kind": "LargestComponent"},
    ])
    def test_experiment_round_trip(self, q):
        e = experiment_from_dict({"tau": 5, "n": 100, "replicates": 100, "quantity": q})
        assert experiment_from_dict(experiment_to_dict(e)) == e

    def test_unknown_keys(self):
        with pytest.raises(KeyError):
            experiment_from_dict({"tau": 5, "n": 100, "replicates": 100, "colour": 1,
                                  "quantity": {"kind": "CmaxTail", "omega": 2}})
        with pytest.raises(KeyError):
            experiment_from_dict({"tau": 5, "n": 100, "replicates": 100,
                                  "quantity": {"kind": "CmaxTail", "omega": 2, "k": 1}})
        with pytest.raises(KeyError):
            experiment_from_dict({"tau": 5, "n": 100, "replicates": 100, "quantity": {"kind": "Nope"}})

    def test_weights_override(self):
        e = experiment_from_dict({"tau": 5, "n": 0, "replicates": 100, "weights": [2, 1, 1],
                                  "quantity": {"kind": "GammaMean", "H": 2, "H_prime": 20, "k": 1}})
        assert e.n == 3 and e.ws.nu_n == 1.5
