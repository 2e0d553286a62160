"""Command-line front end: simulate, fit, experiment, oracle.

Exit codes: 0 ok, 2 config error, 3 resource limit, 4 degenerate data.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .experiment import ExperimentConfig, run_experiment
from .oracle import acv_error_rate_scan, arfima_quadrature_check, empcov_fluctuation_scan
from .spectral import empirical_acv, kernel_estimate, periodogram
from .trawl import (
    ResourceLimitError,
    SimulationConfig,
    TimeSeries,
    TrawlModel,
    model_from_config,
    simulate,
    theoretical_acv,
    truncation_index,
)
from .whittle import WhittleConfig, fit_whittle, local_whittle

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_DEGENERATE = 4


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _out_stream(path):
    return open(path, "w") if path else sys.stdout


def cmd_simulate(args) -> int:
    try:
        cfg = _load_json(args.config)
        model = model_from_config(cfg)
        sim = SimulationConfig(
            n=int(cfg["n"]),
            truncation_tol=float(cfg.get("truncation_tol", 1e-3)),
            rng_seed=int(args.seed if args.seed is not None else cfg.get("rng_seed", 0)),
            max_terms=cfg.get("max_terms"),
        )
    except ResourceLimitError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except Exception as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        series = simulate(model, sim)
    except ResourceLimitError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    out = _out_stream(args.out)
    try:
        series.to_csv(out)
        if args.emit_acf is not None:
            kmax = int(args.emit_acf)
            emp = empirical_acv(series, kmax)
            theo = theoretical_acv(model, kmax)
            out.write("\nlag,empirical_acv,theoretical_acv\n")
            for k in range(kmax + 1):
                out.write(f"{k},{emp[k]:.10g},{theo[k]:.10g}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_fit(args) -> int:
    try:
        series = TimeSeries.from_csv(args.series)
    except Exception as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if len(series) < 64:
        print("config error: need a series of length >= 64", file=sys.stderr)
        return EXIT_CONFIG
    if np.all(series.values == series.values[0]):
        print("degenerate data: constant series", file=sys.stderr)
        return EXIT_DEGENERATE
    pg = periodogram(series)
    try:
        if args.estimator == "whittle":
            res = fit_whittle(pg, WhittleConfig(degree=args.degree))
            payload = res.to_dict()
        elif args.estimator == "local-whittle":
            m = args.m if args.m is not None else min(len(series) // 4, 200)
            payload = {"alpha_lw": local_whittle(pg, m), "m": m}
        else:
            payload = {
                "f_hat": kernel_estimate(series, args.lambda0, args.bandwidth),
                "lambda0": args.lambda0,
                "bandwidth": args.bandwidth,
            }
    except ValueError as exc:
        print(f"degenerate data: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    out = _out_stream(args.out)
    try:
        json.dump(payload, out, indent=2)
        out.write("\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_experiment(args) -> int:
    try:
        if args.config:
            cfg = ExperimentConfig.from_dict(_load_json(args.config))
        else:
            cfg = ExperimentConfig()
        if args.seed is not None:
            cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "base_seed": args.seed})
        if args.threads:
            cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "threads": args.threads})
    except Exception as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = run_experiment(cfg)
    except ResourceLimitError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    empty = [r for r in report.rows if r["replicates"] == 0]
    if args.out:
        report.to_csv(args.out + ".csv")
        with open(args.out + ".json", "w") as fh:
            fh.write(report.to_json())
    elif args.format == "json":
        print(report.to_json())
    else:
        report.to_csv(sys.stdout)
    if empty:
        print(f"{len(empty)} empty cells", file=sys.stderr)
        return EXIT_RESOURCE
    return EXIT_OK


def cmd_oracle(args) -> int:
    try:
        cfg = _load_json(args.config)
        scan = cfg["scan"]
    except Exception as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if scan == "arfima-quadrature":
        err = arfima_quadrature_check(float(cfg["d"]), int(cfg.get("kmax", 20)))
        payload = json.dumps({"scan": scan, "d": cfg["d"], "kmax": cfg.get("kmax", 20), "max_abs_error": err})
        out = _out_stream(args.out)
        out.write(payload + "\n")
        if out is not sys.stdout:
            out.close()
        return EXIT_OK
    try:
        model = model_from_config(cfg)
        n_grid = tuple(cfg.get("n_grid", (250, 1000, 4000)))
        reps = int(cfg.get("replications", 500))
        seed = int(args.seed if args.seed is not None else cfg.get("rng_seed", 0))
        tol = float(cfg.get("truncation_tol", 1e-2))
        if scan == "empcov":
            rep = empcov_fluctuation_scan(model, int(cfg.get("k", 0)), int(cfg.get("ell", 0)),
                                          n_grid, reps, rng_seed=seed, truncation_tol=tol)
        elif scan == "acv-error":
            rep = acv_error_rate_scan(model, int(cfg.get("kmax", 5)), n_grid, reps,
                                      rng_seed=seed, truncation_tol=tol)
        else:
            print(f"config error: unknown scan {scan!r}", file=sys.stderr)
            return EXIT_CONFIG
    except ResourceLimitError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    if args.out:
        rep.to_csv(args.out + ".csv")
        with open(args.out + ".json", "w") as fh:
            fh.write(rep.to_json())
    elif args.format == "json":
        print(rep.to_json())
    else:
        rep.to_csv(sys.stdout)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trawlspec", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("simulate", help="simulate a trawl process to CSV")
    ps.add_argument("--config", required=True, help="JSON model/simulation config")
    ps.add_argument("--out", default=None)
    ps.add_argument("--seed", type=int, default=None)
    ps.add_argument("--emit-acf", type=int, default=None, metavar="KMAX",
                    help="append empirical vs theoretical ACF up to lag KMAX")
    ps.set_defaults(func=cmd_simulate)

    pf = sub.add_parser("fit", help="estimate the trawl exponent / spectral density")
    pf.add_argument("series", help="single-column CSV with header x")
    pf.add_argument("--estimator", choices=("whittle", "local-whittle", "kernel"), default="whittle")
    pf.add_argument("--degree", type=int, default=2, help="trig-polynomial degree N (whittle)")
    pf.add_argument("--m", type=int, default=None, help="bandwidth in frequencies (local-whittle)")
    pf.add_argument("--lambda0", type=float, default=1.5707963267948966)
    pf.add_argument("--bandwidth", type=float, default=0.2)
    pf.add_argument("--out", default=None)
    pf.set_defaults(func=cmd_fit)

    pe = sub.add_parser("experiment", help="run the Monte Carlo bias/sd grid")
    pe.add_argument("--config", default=None)
    pe.add_argument("--out", default=None, help="basename for .csv/.json outputs")
    pe.add_argument("--seed", type=int, default=None)
    pe.add_argument("--threads", type=int, default=0)
    pe.add_argument("--format", choices=("csv", "json"), default="csv")
    pe.set_defaults(func=cmd_experiment)

    po = sub.add_parser("oracle", help="run an oracle-module scan")
    po.add_argument("--config", required=True,
                    help='JSON, e.g. {"scan":"empcov","seed":{...},"sequence":{...}}')
    po.add_argument("--out", default=None)
    po.add_argument("--seed", type=int, default=None)
    po.add_argument("--format", choices=("csv", "json"), default="csv")
    po.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
