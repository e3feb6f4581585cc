import hashlib
import json
import os

import numpy as np
import pytest

from nrgraph import cli
from nrgraph.dist import critical_cF


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_weights(tmp_path, capsys):
    p = tmp_path / "w.csv"
    assert run(capsys, "weights", "--tau", "3.5", "--c-f", "critical", "--n", "4", "--out", str(p))[0] == 0
    rows = p.read_text().splitlines()
    assert rows[0] == "index,weight" and len(rows) == 5
    w1 = float(rows[1].split(",")[1])
    assert w1 == pytest.approx((4 * 3**-2.5) ** 0.4, rel=1e-14)
    assert w1 == pytest.approx((critical_cF(3.5) * 4) ** 0.4, rel=1e-14)
    first = p.read_bytes()
    run(capsys, "weights", "--tau", "3.5", "--n", "4", "--out", str(p))
    assert p.read_bytes() == first


def test_weights_rejects_n1(capsys):
    code, _, err = run(capsys, "weights", "--tau", "3.5", "--n", "1")
    assert code == 2 and "--n" in err


def test_sample_components_bp_walk_oracle(tmp_path, capsys):
    base = ["--tau", "3.5", "--n", "300"]
    code, out, _ = run(capsys, "sample", *base, "--out", str(tmp_path / "g.csv"), "--binary", str(tmp_path / "g.bin"))
    assert code == 0 and json.loads(out)["seed"] == 42
    code, out, _ = run(capsys, "components", *base, "--out", str(tmp_path / "c.csv"), "--trace", str(tmp_path / "t.csv"))
    assert code == 0 and json.loads(out)["c_max"] >= 1
    assert (tmp_path / "c.csv").read_text().startswith("size,count\n")
    assert run(capsys, "bp", *base, "--out", str(tmp_path / "b.csv"))[0] == 0
    code, out, _ = run(capsys, "walk", *base, "--omega", "2", "--out", str(tmp_path / "w.csv"))
    assert code == 0 and json.loads(out)["gamma"] >= 1
    assert run(capsys, "walk", *base)[0] == 2
    code, out, _ = run(capsys, "oracle", "--tau", "3.5", "--n", "4")
    assert code == 0 and out.startswith("value,prob\n")
    assert run(capsys, "oracle", "--tau", "3.5", "--n", "7")[0] == 2


def test_seed_controls_sample(capsys):
    a = run(capsys, "sample", "--tau", "4.5", "--n", "500", "--seed", "1")[1]
    b = run(capsys, "sample", "--tau", "4.5", "--n", "500", "--seed", "1")[1]
    c = run(capsys, "sample", "--tau", "4.5", "--n", "500", "--seed", "2")[1]
    assert a == b != c


def test_bounds_table(tmp_path, capsys):
    p = tmp_path / "b.csv"
    assert run(capsys, "bounds", "--tau", "5", "--n", "1000", "10000", "--out", str(p))[0] == 0
    lines = p.read_text().splitlines()
    assert lines[0] == "n,tau,omega,H,Hprime,k,bound,source"
    assert any(l.endswith("cmax_tail_leading") for l in lines)


def write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


SMALL = {"name": "small", "experiments": [
    {"tau": 5, "n": 500, "replicates": 200, "quantity": {"kind": "CmaxTail", "omega": 2}},
    {"tau": 5, "n": 500, "replicates": 2000, "quantity": {"kind": "OptionalStopping", "omega": 2}},
]}


def test_verify_outputs(tmp_path, capsys):
    cfg = write(tmp_path, SMALL)
    out = tmp_path / "out"
    code, _, _ = run(capsys, "verify", cfg, "--out-dir", str(out), "--omit-timing")
    assert code == 0
    report = (out / "small.json").read_bytes()
    manifest = json.loads((out / "small.manifest.json").read_text())
    assert manifest["config_sha256"] == hashlib.sha256(open(cfg, "rb").read()).hexdigest()
    assert manifest["outputs"]["small.json"] == hashlib.sha256(report).hexdigest()
    assert manifest["seeds"] == [42] and "numpy" in manifest["versions"]
    assert not [f for f in os.listdir(out) if f.startswith(".")]
    # regenerating from the manifest's config reproduces the report byte for byte
    cfg2 = write(tmp_path, manifest["config_contents"], "again.json")
    run(capsys, "verify", cfg2, "--out-dir", str(tmp_path / "again"), "--omit-timing")
    assert (tmp_path / "again" / "small.json").read_bytes() == report


def test_verify_csv(tmp_path, capsys):
    cfg = write(tmp_path, SMALL)
    assert run(capsys, "verify", cfg, "--out-dir", str(tmp_path), "--format", "csv")[0] == 0
    assert (tmp_path / "small.csv").read_text().startswith("quantity,estimate")


def test_verify_config_errors(tmp_path, capsys):
    code, _, err = run(capsys, "verify", write(tmp_path, '{\n "experiments": [\n'))
    assert code == 2 and "line 3" in err
    code, _, err = run(capsys, "verify", write(tmp_path, {"experiments": [], "extra": 1}))
    assert code == 2 and "extra" in err
    bad = {"experiments": [{"tau": 5, "n": 100, "replicates": 100, "quantity": {"kind": "CmaxTail", "omega": 0.5}}]}
    code, _, err = run(capsys, "verify", write(tmp_path, bad))
    assert code == 2 and "experiments[0]" in err
    assert run(capsys, "verify", str(tmp_path / "missing.json"))[0] == 2


def test_verify_refusal(tmp_path, capsys):
    big = {"experiments": [{"tau": 5, "n": 10**9, "replicates": 100, "quantity": {"kind": "CmaxTail", "omega": 2}}]}
    assert run(capsys, "verify", write(tmp_path, big))[0] == 3


def test_verify_violation_exit(tmp_path, capsys, monkeypatch):
    from nrgraph import mc

    def fake(exps, workers=None):
        return [mc.McReport("x", 1.0, 0.0, (1.0, 1.0), 0.5, mc.Verdict.BOUND_VIOLATED, 0.0, 0.0, 100)]

    monkeypatch.setattr(mc, "run_experiments", fake)
    assert run(capsys, "verify", write(tmp_path, SMALL), "--out-dir", str(tmp_path))[0] == 1


def test_env_workers(tmp_path, capsys, monkeypatch):
    from nrgraph import mc

    seen = []
    real = mc.run_experiments
    monkeypatch.setattr(mc, "run_experiments", lambda e, workers=None: seen.append(workers) or real(e, workers))
    monkeypatch.setenv("NR_WORKERS", "2")
    run(capsys, "verify", write(tmp_path, {**SMALL, "workers": 1}), "--out-dir", str(tmp_path))
    assert seen == [2]


@pytest.mark.slow
def test_bundled_desk_config(tmp_path, capsys):
    code, out, _ = run(capsys, "verify", str(cli.bundled_config("thm1-desk.json")), "--out-dir", str(tmp_path))
    assert code == 0, out
