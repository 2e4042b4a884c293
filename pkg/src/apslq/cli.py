"""Command line interface.

Subcommands:
  generate    build a seeded test-set file
  solve       find a relation for one input vector
  experiment  run a method matrix over a test set, write CSV + JSON reports
  verify      evaluate a relation against a test-set instance at high precision
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import mpmath as mp

from .harness import MethodConfig, run_experiment
from .numerics import PrecisionContext, parse_number
from .pslq import SolverConfig, SolverStatus, ThresholdMode, solve
from .quadring import (
    UnsupportedRingError,
    embed_now,
    format_relation,
    lattice_params,
    parse_relation,
    ring_from_id,
)
from .reduction import ReductionStatus, default_reduction_gamma, inner_ring_for, reduction_solve
from .testgen import (
    CoeffSize,
    PoolKind,
    TestSet,
    TestSetSpec,
    generate_test_set,
    load_test_set,
    save_test_set,
)

_THRESHOLDS = {m.value: m for m in ThresholdMode}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="apslq",
        description="Integer relation detection over quadratic rings of integers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a test-set file")
    gen.add_argument("--d", type=int, required=True,
                     help="ring id: square-free D, or 0 for the rational integers")
    gen.add_argument("--pool", choices=["real", "complex"], required=True)
    gen.add_argument("--size", choices=["small", "large"], required=True)
    gen.add_argument("--count", type=int, required=True)
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--precision", type=int, default=None,
                     help="working decimal digits (default 75 small / 175 large)")
    gen.add_argument("--out", required=True)

    sol = sub.add_parser("solve", help="solve a single input vector")
    sol.add_argument("--d", type=int, required=True)
    sol.add_argument("--method", choices=["apslq", "reduction"], default="apslq")
    sol.add_argument("--gamma", default=None,
                     help="'gamma1' or a decimal; apslq default is gamma1")
    sol.add_argument("--threshold", choices=sorted(_THRESHOLDS), default="d-1")
    sol.add_argument("--precision", type=int, default=75)
    sol.add_argument("--max-iter", type=int, default=None,
                     help="iteration cap (default 10 * n * precision)")
    sol.add_argument("--in", dest="infile", default="-",
                     help="file with one number per line (or '-' for stdin); "
                          "complex entries as re+im*I")
    sol.add_argument("--trace", default=None,
                     help="write line-delimited JSON iteration records here")

    exp = sub.add_parser("experiment", help="run methods over a test set")
    exp.add_argument("--set", dest="set_file", required=True)
    exp.add_argument("--method", action="append", required=True,
                     choices=["apslq", "reduction"])
    exp.add_argument("--gamma", action="append", default=None,
                     help="repeatable: 'gamma1' or a decimal")
    exp.add_argument("--threshold", action="append", default=None,
                     choices=sorted(_THRESHOLDS))
    exp.add_argument("--max-iter", type=int, default=None)
    exp.add_argument("--out", required=True,
                     help="report base path; writes <out>.csv and <out>.json")
    exp.add_argument("--format", choices=["json", "csv", "both"], default="both")

    ver = sub.add_parser("verify", help="evaluate a relation against an instance")
    ver.add_argument("--relation", required=True,
                     help="e.g. \"(-1,2,3+1*w)\"")
    ver.add_argument("--set", dest="set_file", required=True)
    ver.add_argument("--instance", type=int, required=True)
    ver.add_argument("--digits", type=int, default=1000)

    return parser


def _resolve_solve_gamma(args, ring, ctx):
    spec = args.gamma
    target = ring if args.method == "apslq" else inner_ring_for(ring)
    with ctx.workdps():
        if spec is None:
            if args.method == "reduction":
                return default_reduction_gamma(target)
            spec = "gamma1"
        if spec == "gamma1":
            params = lattice_params(target, ctx)
            if params.gamma1 is None:
                raise ValueError(f"gamma1 does not exist for {target}")
            return params.gamma1
        return mp.mpf(spec)


def _cmd_generate(args) -> int:
    ring = ring_from_id(args.d)
    precision = PrecisionContext(args.precision) if args.precision else None
    spec = TestSetSpec(ring=ring, pool=PoolKind(args.pool),
                       coeff_size=CoeffSize(args.size), count=args.count,
                       seed=args.seed, precision=precision)
    ts = TestSet(spec, generate_test_set(spec))
    save_test_set(ts, args.out)
    print(f"wrote {args.count} instances to {args.out}")
    return 0


def _read_vector(args, ctx):
    text = sys.stdin.read() if args.infile == "-" else Path(args.infile).read_text()
    entries = [line.strip() for line in text.replace(",", "\n").splitlines()
               if line.strip()]
    if len(entries) < 2:
        raise ValueError("input vector needs at least two entries")
    return [parse_number(e, ctx) for e in entries]


def _cmd_solve(args) -> int:
    ring = ring_from_id(args.d)
    ctx = PrecisionContext(args.precision)
    xs = _read_vector(args, ctx)
    gamma = _resolve_solve_gamma(args, ring, ctx)
    cap = args.max_iter or 10 * len(xs) * ctx.decimal_digits
    cfg = SolverConfig(gamma=gamma, precision=ctx,
                       threshold_mode=_THRESHOLDS[args.threshold],
                       max_iterations=cap)
    trace = None
    trace_fh = None
    if args.trace:
        trace_fh = open(args.trace, "w")

        def trace(rec):
            trace_fh.write(json.dumps({
                "iteration": rec.iteration, "r": rec.r, "k": rec.k,
                "abs_y_min": mp.nstr(rec.abs_y_min, 8),
                "bound": mp.nstr(rec.bound, 8),
            }) + "\n")

    try:
        if args.method == "apslq":
            out = solve(xs, ring, cfg, trace=trace)
            if out.status is SolverStatus.RELATION:
                print(format_relation(out.relation))
                print(f"iterations: {out.iterations_used}")
                return 0
            print(f"FAIL ({out.diagnostic}); iterations: {out.iterations_used}")
            return 0
        rout = reduction_solve(xs, ring, cfg, trace=trace)
        if rout.status is ReductionStatus.RELATION:
            print(format_relation(rout.relation))
            print(f"inner iterations: {rout.inner.iterations_used}")
            return 0
        print(json.dumps(rout.to_json()))
        return 0
    finally:
        if trace_fh:
            trace_fh.close()


def _cmd_experiment(args) -> int:
    ts = load_test_set(args.set_file)
    gammas = args.gamma if args.gamma else [None]
    thresholds = [_THRESHOLDS[t] for t in (args.threshold or ["d-1"])]
    configs = []
    for method in args.method:
        for g in gammas:
            gamma = g
            if g is not None and g != "gamma1":
                gamma = float(g)
            if method == "apslq" and gamma is None:
                raise ValueError("apslq needs --gamma ('gamma1' or a decimal)")
            for t in thresholds:
                configs.append(MethodConfig(method=method, gamma=gamma,
                                            threshold_mode=t,
                                            max_iterations=args.max_iter))
    report = run_experiment(ts, configs)
    base = Path(args.out)
    if args.format in ("json", "both"):
        base.with_suffix(".json").write_text(
            json.dumps(report.to_json(), indent=1) + "\n")
    if args.format in ("csv", "both"):
        with open(base.with_suffix(".csv"), "w", newline="") as fh:
            csv.writer(fh).writerows(report.csv_rows())
    for key in sorted(report.cells):
        print(f"{key[0]} gamma={key[1]} threshold={key[2]}: {report.tally(key)}")
    return 0


def _cmd_verify(args) -> int:
    ts = load_test_set(args.set_file)
    if not 0 <= args.instance < len(ts.instances):
        raise ValueError(f"instance index {args.instance} out of range")
    instance = ts.instances[args.instance]
    ring = ts.spec.ring
    relation = parse_relation(args.relation, ring)
    if len(relation) != len(instance.x):
        raise ValueError("relation length does not match the instance vector")
    ctx = PrecisionContext(args.digits)
    from .harness import _instance_vector_at  # same recomputation as classify
    xs = _instance_vector_at(instance, ring, ctx)
    with ctx.workdps():
        residual = abs(mp.fsum(embed_now(a) * v for a, v in zip(relation, xs)))
        print(f"residual at {args.digits} digits: {mp.nstr(residual, 8)}")
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "solve": _cmd_solve,
    "experiment": _cmd_experiment,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, UnsupportedRingError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
