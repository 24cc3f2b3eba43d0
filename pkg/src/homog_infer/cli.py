"""Command line entry point.

    homog-infer run --config cfg.json [--out DIR] [--seed N]
                    [--replicates N] [--threads N]
    homog-infer verify [--filter SUBSTR] [--json]
    homog-infer constants --H 0.85 --m 1 [--c 1.0]

Exit codes: 0 success, 1 experiment/check failure, 2 configuration error.
Thread count falls back to the HOMOG_INFER_THREADS environment variable.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time


def _threads_default() -> int:
    try:
        return max(1, int(os.environ.get("HOMOG_INFER_THREADS", "1")))
    except ValueError:
        return 1


def _cmd_run(args) -> int:
    from .experiments import ConfigError, ExperimentConfig, emit_outputs, run_experiment

    try:
        config = ExperimentConfig.from_json(args.config)
        overrides = {}
        if args.out is not None:
            overrides["output_dir"] = args.out
        if args.seed is not None:
            overrides["base_seed"] = args.seed
        if args.replicates is not None:
            overrides["replicates"] = args.replicates
        threads = args.threads if args.threads is not None else _threads_default()
        overrides["threads"] = threads
        config = dataclasses.replace(config, **overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    t0 = time.time()
    rows = run_experiment(config)
    wall = time.time() - t0
    out_dir = config.output_dir or "."
    paths = emit_outputs(rows, config, out_dir, wall_time=wall)
    print(f"wrote {paths['results']} ({len(rows)} rows, {wall:.1f}s)")
    failed = [r for r in rows if r.columns.get("error") or r.columns.get("ok") is False]
    if failed:
        print(f"{len(failed)} cell(s) reported failures", file=sys.stderr)
        return 1
    return 0


def _cmd_verify(args) -> int:
    from .experiments import verify_theory

    report = verify_theory(args.filter)
    if args.json:
        json.dump(report, sys.stdout, indent=2)
        print()
    else:
        for chk in report["checks"]:
            status = "PASS" if chk["ok"] else "FAIL"
            print(f"[{status}] {chk['name']}: {chk['detail']}")
        n_ok = sum(1 for c in report["checks"] if c["ok"])
        print(f"{n_ok}/{len(report['checks'])} checks passed")
    return 0 if report["ok"] else 1


def _cmd_constants(args) -> int:
    from .fou import cov_tail_coeff, stationary_sigma2
    from .gaussian import HermiteCoeffs
    from .multiscale import ModelSpec, reduced_hurst
    from .theory import (hermite_norm_const, limit_diffusivity_sq,
                         limit_diffusivity_sq_critical, noncentral_overlap_limit,
                         noncentral_scale, second_chaos_const)

    H, m, c = args.H, args.m, args.c
    if not 0.0 < H < 1.0 or m < 1:
        print("need 0 < H < 1 and m >= 1", file=sys.stderr)
        return 2
    out = {"H": H, "m": m, "c_m": c,
           "hstar": reduced_hurst(H, m),
           "sigma2": stationary_sigma2(H)}
    model = ModelSpec.make(H, 0.5, HermiteCoeffs.single(m, c))

    def attempt(key, fn, *a):
        try:
            out[key] = fn(*a)
        except ValueError as exc:
            out[key] = f"undefined: {exc}"

    attempt("cov_tail_coeff", cov_tail_coeff, H)
    if abs(out["hstar"] - 0.5) < 1e-12:
        attempt("limit_diffusivity_sq_critical", limit_diffusivity_sq_critical, model)
    else:
        attempt("limit_diffusivity_sq", limit_diffusivity_sq, model)
    attempt("second_chaos_const", second_chaos_const, H, m)
    attempt("noncentral_scale", noncentral_scale, H, m, c)
    attempt("noncentral_overlap_limit", noncentral_overlap_limit, H, m)
    if H > 0.5:
        attempt("hermite_norm_const", hermite_norm_const, H, m)
    json.dump(out, sys.stdout, indent=2, default=str)
    print()
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="homog-infer",
        description="Multiscale simulation and subsampled quadratic-variation "
                    "inference for slow/fast systems with fractional noise.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a configured experiment sweep")
    p_run.add_argument("--config", required=True, help="JSON config file")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--seed", type=int, default=None, help="override base seed")
    p_run.add_argument("--replicates", type=int, default=None)
    p_run.add_argument("--threads", type=int, default=None)
    p_run.set_defaults(func=_cmd_run)

    p_ver = sub.add_parser("verify", help="run the verification battery")
    p_ver.add_argument("--filter", default=None,
                       help="only run checks whose name contains this substring")
    p_ver.add_argument("--json", action="store_true", help="JSON report")
    p_ver.set_defaults(func=_cmd_verify)

    p_con = sub.add_parser("constants", help="print theory constants as JSON")
    p_con.add_argument("--H", type=float, required=True)
    p_con.add_argument("--m", type=int, required=True)
    p_con.add_argument("--c", type=float, default=1.0, help="leading coefficient")
    p_con.set_defaults(func=_cmd_constants)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
