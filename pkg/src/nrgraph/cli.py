"""Command-line front end.

Subcommands: weights, sample, components, bp, walk, bounds, oracle, verify.
All randomness is driven by ``--seed`` (default 42).  Exit codes: 0 ok,
1 bound violated, 2 configuration error, 3 resource refusal.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import platform
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__, bounds, mc, oracle
from .bp import GammaConfig, run_marked_bp, run_walk
from .dist import (
    ParetoTail,
    build_weights,
    critical_cF,
    read_weights_csv,
    write_weights_csv,
)
from .explore import components_union_find, explore_cluster
from .sampler import (
    RngStream,
    sample_naive,
    sample_poisson_collapse,
    write_graph_binary,
    write_graph_csv,
)

EXIT_OK, EXIT_VIOLATED, EXIT_CONFIG, EXIT_REFUSED = 0, 1, 2, 3

RUN_CONFIG_KEYS = {"name", "workers", "format", "out_dir", "omit_timing", "experiments"}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending line or field."""


# -- helpers ----------------------------------------------------------------

def atomic_write(path, data: str | bytes) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _c_f(text: str, tau: float) -> float:
    if text == "critical":
        return critical_cF(tau)
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"--c-f: expected a number or 'critical', got {text!r}") from None


def _add_weight_args(p: argparse.ArgumentParser, need_n: bool = True) -> None:
    p.add_argument("--tau", type=float, default=None, help="tail exponent, > 3")
    p.add_argument("--c-f", default="critical", help="tail constant or 'critical' (default)")
    if need_n:
        p.add_argument("--n", type=int, default=None, help="number of vertices")
    p.add_argument("--weights-csv", default=None, help="read weights from CSV instead")


def _weights_from(args):
    if args.weights_csv:
        return read_weights_csv(args.weights_csv)
    if args.tau is None or args.n is None:
        raise ConfigError("give --tau and --n, or --weights-csv")
    if args.n < 2:
        raise ConfigError(f"--n: need n >= 2, got {args.n}")
    return build_weights(ParetoTail(args.tau, _c_f(args.c_f, args.tau)), args.n)


def _sample(ws, method, seed, stream=0):
    rng = RngStream(seed, stream)
    if method == "naive":
        return sample_naive(ws, rng)
    return sample_poisson_collapse(ws, rng)


def _print(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


# -- subcommands ------------------------------------------------------------

def cmd_weights(args) -> int:
    ws = _weights_from(args)
    if args.out:
        write_weights_csv(ws, args.out)
    else:
        out = csv.writer(sys.stdout, lineterminator="\n")
        out.writerow(["index", "weight"])
        out.writerows((i, repr(float(w))) for i, w in enumerate(ws.w, start=1))
    return EXIT_OK


def cmd_sample(args) -> int:
    ws = _weights_from(args)
    g = _sample(ws, args.method, args.seed)
    if args.out:
        write_graph_csv(g, args.out)
    if args.binary:
        write_graph_binary(g, args.binary)
    _print({"n": g.n, "m": g.m, "method": g.method, "seed": args.seed, "digest": g.digest()})
    return EXIT_OK


def cmd_components(args) -> int:
    ws = _weights_from(args)
    g = _sample(ws, args.method, args.seed)
    summary = components_union_find(g)
    if args.out:
        summary.write_csv(args.out)
    if args.trace:
        explore_cluster(g, args.vertex).write_csv(args.trace)
    _print({"n": g.n, "m": g.m, "c_max": summary.c_max, "components": int(summary.sizes.size)})
    return EXIT_OK


def cmd_bp(args) -> int:
    ws = _weights_from(args)
    trace = run_marked_bp(ws, RngStream(args.seed))
    if args.out:
        trace.write_csv(args.out)
    _print({"initial_mark": trace.initial_mark, "t_star": trace.t_star,
            "explored_marks": trace.explored_marks})
    return EXIT_OK


def cmd_walk(args) -> int:
    ws = _weights_from(args)
    if args.omega is not None:
        if args.tau is None:
            raise ConfigError("--omega needs --tau")
        cfg = GammaConfig.for_theorem(ws.n, args.tau, args.omega, args.delta)
    elif None in (args.H, args.H_prime, args.k):
        raise ConfigError("give --omega, or all of --H, --H-prime and --k")
    else:
        cfg = GammaConfig(args.H, args.H_prime, args.k)
    path = run_walk(ws, cfg, RngStream(args.seed))
    if args.out:
        path.write_csv(args.out)
    _print({"H": cfg.H, "H_prime": cfg.H_prime, "k": cfg.k, "gamma": path.gamma,
            "s_gamma": path.s_gamma, "positive_through_k": path.positive_through_k})
    return EXIT_OK


def bound_rows(tau: float, c_f: float, ns, omegas, delta: float = 0.1) -> list[dict]:
    """Rows of the bound table for every ``(n, omega)``."""
    spec = ParetoTail(tau, c_f)
    rows = []
    for n in ns:
        ws = build_weights(spec, n)
        for omega in omegas:
            cfg = GammaConfig.for_theorem(n, tau, omega, delta)
            base = {"n": n, "tau": tau, "omega": omega, "H": cfg.H, "Hprime": cfg.H_prime, "k": cfg.k}
            ds = bounds.diagnostics(ws, cfg)
            eg = bounds.egamma_upper(ds)
            rows.append({**base, "bound": "" if eg is None else eg, "source": "egamma_upper"})
            if eg is not None and eg >= 1:
                rows.append({**base, "bound": bounds.cluster_tail_upper(ds, eg),
                             "source": "cluster_tail_upper"})
            if tau > 4:
                rows.append({**base, "bound": bounds.theorem1_bound(spec, omega),
                             "source": "cmax_tail_leading"})
            else:
                rows.append({**base, "bound": bounds.theorem2_threshold(n, tau, omega),
                             "source": "cmax_threshold"})
    return rows


def cmd_bounds(args) -> int:
    if args.tau is None:
        raise ConfigError("--tau is required")
    rows = bound_rows(args.tau, _c_f(args.c_f, args.tau), args.n, args.omega, args.delta)
    if args.out:
        bounds.write_bound_table(rows, args.out)
    else:
        out = csv.DictWriter(sys.stdout, fieldnames=bounds.BOUND_TABLE_COLUMNS, lineterminator="\n")
        out.writeheader()
        out.writerows(rows)
    return EXIT_OK


def cmd_oracle(args) -> int:
    ws = _weights_from(args)
    if ws.n > oracle.MAX_ORACLE_N:
        raise ConfigError(f"--n: exact enumeration needs n <= {oracle.MAX_ORACLE_N}")
    cmax, cluster = oracle.exact_component_laws(ws)
    law = cmax if args.law == "cmax" else cluster
    if args.out:
        law.write_csv(args.out)
    else:
        print("value,prob")
        for s, p in zip(law.support, law.probs):
            print(f"{s},{p!r}")
    return EXIT_OK


# -- verify -----------------------------------------------------------------

def load_run_config(path) -> tuple[dict, list[mc.Experiment], bytes]:
    """Parse and validate a run config; raises :class:`ConfigError`."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        cfg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    except UnicodeDecodeError:
        raise ConfigError(f"{path}: not UTF-8 text") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be an object")
    extra = set(cfg) - RUN_CONFIG_KEYS
    if extra:
        raise ConfigError(f"{path}: unknown keys {sorted(extra)}")
    if cfg.get("format", "json") not in ("json", "csv"):
        raise ConfigError(f"{path}: field 'format' must be 'json' or 'csv'")
    items = cfg.get("experiments")
    if not isinstance(items, list) or not items:
        raise ConfigError(f"{path}: field 'experiments' must be a non-empty list")
    exps = []
    for i, d in enumerate(items):
        where = f"{path}: experiments[{i}]"
        if not isinstance(d, dict):
            raise ConfigError(f"{where}: must be an object")
        try:
            exps.append(mc.experiment_from_dict(d))
        except KeyError as exc:
            raise ConfigError(f"{where}: {exc.args[0]}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{where}: {exc}") from None
    return cfg, exps, raw


def _versions() -> dict:
    import numba
    import scipy

    return {"nrgraph": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__, "numba": numba.__version__}


def _workers(args, cfg) -> int:
    if args.workers is not None:
        return args.workers
    if "NR_WORKERS" in os.environ:
        return mc.default_workers()
    return int(cfg.get("workers", 1))


def cmd_verify(args) -> int:
    cfg, exps, raw = load_run_config(args.config)
    for e in exps:
        mc.check_resources(e)
    fmt = args.format or cfg.get("format", "json")
    out_dir = Path(args.out_dir or cfg.get("out_dir") or "reports")
    timing = not (args.omit_timing or cfg.get("omit_timing", False))
    name = cfg.get("name") or Path(args.config).stem

    reports = mc.run_experiments(exps, workers=_workers(args, cfg))

    if fmt == "json":
        body = json.dumps([r.to_dict(timing) for r in reports], indent=1, sort_keys=True,
                          allow_nan=False) + "\n"
    else:
        body = mc.reports_to_csv(reports, timing)
    report_path = out_dir / f"{name}.{fmt}"
    atomic_write(report_path, body)
    manifest = {
        "config": args.config if isinstance(args.config, str) else str(args.config),
        "config_sha256": hashlib.sha256(raw).hexdigest(),
        "config_contents": json.loads(raw),
        "seeds": sorted({e.seed for e in exps}),
        "format": fmt,
        "omit_timing": not timing,
        "versions": _versions(),
        "outputs": {report_path.name: hashlib.sha256(body.encode()).hexdigest()},
    }
    atomic_write(out_dir / f"{name}.manifest.json", json.dumps(manifest, indent=1, sort_keys=True) + "\n")

    for e, r in zip(exps, reports):
        print(f"{r.verdict.value:14s} {r.quantity:40s} n={e.n} est={r.estimate:.6g} "
              f"bound={r.bound_value}")
    bad = [r for r in reports if r.verdict not in (mc.Verdict.BOUND_HOLDS, mc.Verdict.INFORMATIONAL)]
    return EXIT_VIOLATED if bad else EXIT_OK


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nrgraph", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("weights", help="write the weight sequence as CSV")
    _add_weight_args(p)
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_weights)

    for name, func, text in (("sample", cmd_sample, "sample one graph"),
                             ("components", cmd_components, "component sizes of one graph")):
        p = sub.add_parser(name, help=text)
        _add_weight_args(p)
        p.add_argument("--method", choices=("naive", "poisson_collapse"), default="poisson_collapse")
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--out", help="output CSV")
        p.set_defaults(func=func)
        if name == "sample":
            p.add_argument("--binary", help="also write the compact binary format")
        else:
            p.add_argument("--trace", help="write the exploration trace of --vertex")
            p.add_argument("--vertex", type=int, default=0)

    p = sub.add_parser("bp", help="run the thinned marked branching process once")
    _add_weight_args(p)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", help="trace CSV")
    p.set_defaults(func=cmd_bp)

    p = sub.add_parser("walk", help="run one stopped walk")
    _add_weight_args(p)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--omega", type=float, help="derive H, H', k from omega")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--H", type=int)
    p.add_argument("--H-prime", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--out", help="path CSV")
    p.set_defaults(func=cmd_walk)

    p = sub.add_parser("bounds", help="tabulate the bounds")
    _add_weight_args(p, need_n=False)
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--omega", type=float, nargs="+", default=[2.0, 4.0, 8.0])
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("oracle", help="exact component laws for n <= 6")
    _add_weight_args(p)
    p.add_argument("--law", choices=("cmax", "cluster"), default="cluster")
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("verify", help="run a JSON experiment config")
    p.add_argument("config")
    p.add_argument("--out-dir")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--workers", type=int)
    p.add_argument("--omit-timing", action="store_true",
                   help="drop runtime_s so reports are byte-reproducible")
    p.set_defaults(func=cmd_verify)
    return parser


def bundled_config(name: str) -> Path:
    return Path(__file__).with_name("configs") / name


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except mc.ResourceRefused as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
