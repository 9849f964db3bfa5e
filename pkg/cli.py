"""
selfdecomp command line
Evaluate characteristic functions and BDCFs, tabulate BDDFs, draw sample
batches, report moments and run the identity verification suite.

    python cli.py cf --kind Gamma --alpha 1 --lambda 1 --which bdcf --t 0:5:11
    python cli.py bddf --model '{"kind": "Levy", "params": {"m": 0, "c": 2}}' --a 0.25
    python cli.py sample --gen loggamma --alpha 1 --lambda 1 --n 1000 --seed 7
    python cli.py moments --kind LogGamma --alpha 2 --lambda 1
    python cli.py verify --only chirp

Exit codes: 0 success, 1 verification failure, 2 usage or model error,
3 numeric failure.
"""

import argparse
import cmath
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

from charfn import PARAM_NAMES, ModelKind, from_descriptor, log_bdcf_function, make_model
from errors import (
    ConfigError, DomainError, ModelDescriptorError, NonFiniteError, QuadratureError,
    SelfDecompError, SeriesConvergenceError,
)
from inversion import bddf
from quadrature import DEFAULT_QUAD
from samplers import GENERATORS, RngStream, SeriesConfig, draw, generate_partitioned
from utils import parse_grid, resolve_seed, write_comments, write_csv, write_json_lines
from validation import SuiteConfig, run_all

LOGGER = logging.getLogger("selfdecomp")

EXIT_OK, EXIT_VERIFY_FAILED, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

# shorthand flag dest -> descriptor key
SHORTHAND = {"alpha": "alpha", "lam": "lambda", "m": "m", "c": "c", "scale": "scale"}


def resolve_model(args):
    """
    Model from --model JSON, or from --kind plus the shorthand flags.
    JSON wins when both are given.
    """
    if args.model is not None:
        if args.kind is not None:
            LOGGER.warning("--model given; ignoring --kind and shorthand parameters")
        return from_descriptor(args.model)
    if args.kind is None:
        raise ModelDescriptorError("a model is required: pass --model JSON or --kind with parameters")
    try:
        kind = ModelKind(args.kind)
    except ValueError:
        # make_model reports the unknown kind
        return make_model(args.kind)
    allowed = PARAM_NAMES[kind]
    params = {key: getattr(args, dest) for dest, key in SHORTHAND.items()
              if key in allowed and getattr(args, dest) is not None}
    return make_model(kind, **params)


def _quad_from_args(args):
    overrides = {name: getattr(args, name) for name in ("abs_tol", "rel_tol", "max_segments", "accel_terms")
                 if getattr(args, name) is not None}
    return replace(DEFAULT_QUAD, **overrides)


def cmd_cf(args, out):
    """Rows t, re, im of log phi or log psi turned into phi(t) or psi(t)"""
    model = resolve_model(args)
    t_grid = parse_grid(args.t)
    log_f = model.log_cf if args.which == "cf" else log_bdcf_function(model, args.numeric)
    rows = []
    for t in t_grid:
        value = cmath.exp(log_f(t))
        rows.append((t, value.real, value.imag))
    write_csv(out, {"command": "cf", "which": args.which, "model": model.to_descriptor()},
              ["t", "re", "im"], rows)
    return EXIT_OK


def _bddf_point(model, a, quad, numeric):
    try:
        return bddf(model, a, quad, numeric)
    except QuadratureError as exc:
        return exc


def cmd_bddf(args, out):
    """
    Rows a, value, est_error, segments_used. A point whose quadrature fails
    is written as a flagged row (value nan, segments -1) and the command
    exits 3 once the whole grid has been written.
    """
    model = resolve_model(args)
    a_grid = parse_grid(args.a)
    quad = _quad_from_args(args)
    if args.workers > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            points = list(pool.map(lambda a: _bddf_point(model, a, quad, args.numeric), a_grid))
    else:
        points = [_bddf_point(model, a, quad, args.numeric) for a in a_grid]

    rows, failures = [], []
    for a, point in zip(a_grid, points):
        if isinstance(point, QuadratureError):
            failures.append(f"a={a!r}: {point}")
            rows.append((a, float("nan"), float("nan"), -1))
        else:
            rows.append(point.as_row())
    write_csv(out, {"command": "bddf", "model": model.to_descriptor()},
              ["a", "value", "est_error", "segments_used"], rows)
    if failures:
        write_comments(out, {f"failed[{i}]": msg for i, msg in enumerate(failures)})
        LOGGER.error("quadrature failed at %d of %d points", len(failures), len(a_grid))
        return EXIT_NUMERIC
    return EXIT_OK


def _generator_params(args):
    params_type, needs_c, _ = GENERATORS[args.gen]
    names = {"alpha": args.alpha, "lam": args.lam}
    missing = [flag for flag, value in (("--alpha", args.alpha), ("--lambda", args.lam)) if value is None]
    if args.gen == "loggamma_innovation" and args.lam is None:
        names["lam"] = 1.0
        missing = [flag for flag in missing if flag != "--lambda"]
    if missing:
        raise ConfigError(f"{args.gen} needs {', '.join(missing)}")
    if needs_c and args.c is None:
        raise ConfigError(f"{args.gen} needs --c")
    try:
        return params_type(**names)
    except DomainError as exc:
        raise ModelDescriptorError(str(exc)) from exc


def cmd_sample(args, out):
    """A batch of draws from one generator, with seed and config in the header"""
    if args.gen not in GENERATORS:
        raise ConfigError(f"unknown generator {args.gen!r}; expected one of {', '.join(GENERATORS)}")
    params = _generator_params(args)
    seed = resolve_seed(args.seed)
    series = SeriesConfig(truncation_n=args.truncation_n, tail_mean_correction=not args.no_tail_correction,
                          block_terms=args.block_terms)
    if args.n < 1:
        raise ConfigError(f"--n must be at least 1, got {args.n}")

    def sampler(count, rng):
        return draw(args.gen, params, count, rng, c=args.c, cfg=series)

    if args.streams > 1:
        batch = generate_partitioned(sampler, args.n, seed, streams=args.streams, workers=args.workers)
    else:
        batch = sampler(args.n, RngStream(seed))

    header = {"generator": batch.generator_tag, "seed": batch.seed, "n": batch.n,
              "params": {"alpha": params.alpha, "lambda": params.lam}}
    if GENERATORS[args.gen][2]:
        header["series"] = {"truncation_n": series.truncation_n,
                            "tail_mean_correction": series.tail_mean_correction,
                            "block_terms": series.block_terms}
    header.update({k: v for k, v in batch.metadata.items() if k not in header})
    if args.format == "json":
        out.write(json.dumps({**header, "values": batch.values.tolist()}, sort_keys=True) + "\n")
    else:
        write_csv(out, header, ["value"], ([float(v)] for v in batch.values))
    return EXIT_OK


def cmd_moments(args, out):
    model = resolve_model(args)
    m = model.moments()
    out.write(json.dumps({"mean": m.mean, "variance": m.variance,
                          "bddf_mean": m.bdrv_mean, "bddf_variance": m.bdrv_variance},
                         sort_keys=True) + "\n")
    return EXIT_OK


def cmd_verify(args, out):
    """JSON line per report; exit 0 only when every check passed"""
    overrides = {"tolerance_scale": args.tolerance_scale, "only": args.only, "workers": args.workers,
                 "seed": resolve_seed(args.seed)}
    if args.moment_samples is not None:
        overrides["moment_samples"] = args.moment_samples
    if args.ks_samples is not None:
        overrides["ks_samples"] = args.ks_samples
    reports = run_all(SuiteConfig(**overrides))
    write_json_lines(out, (report.to_json() for report in reports))
    failed = [r.identity_id for r in reports if not r.passed]
    if failed:
        LOGGER.error("%d of %d checks failed: %s", len(failed), len(reports), ", ".join(sorted(set(failed))))
        return EXIT_VERIFY_FAILED
    LOGGER.info("all %d checks passed", len(reports))
    return EXIT_OK


COMMANDS = {
    "cf": cmd_cf,
    "bddf": cmd_bddf,
    "sample": cmd_sample,
    "moments": cmd_moments,
    "verify": cmd_verify,
}


def _add_model_flags(parser):
    group = parser.add_argument_group("model")
    group.add_argument("--model", help='JSON descriptor, e.g. {"kind": "Gamma", "params": {"alpha": 1, "lambda": 1}}')
    group.add_argument("--kind", help="model kind for the shorthand flags: " + ", ".join(k.value for k in ModelKind))
    _add_param_flags(group)


def _add_param_flags(group, c_help="Levy scale c"):
    group.add_argument("--alpha", type=float)
    group.add_argument("--lambda", dest="lam", type=float)
    group.add_argument("--m", type=float)
    group.add_argument("--c", type=float, help=c_help)
    group.add_argument("--scale", type=float)


def _add_output_flags(parser):
    parser.add_argument("--output", "-o", help="write to this file instead of standard output")


def build_parser():
    parser = argparse.ArgumentParser(prog="selfdecomp", description=__doc__.splitlines()[1])
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    sub = parser.add_subparsers(dest="command", required=True)

    cf = sub.add_parser("cf", help="evaluate phi(t) or psi(t) on a grid")
    _add_model_flags(cf)
    cf.add_argument("--which", choices=("cf", "bdcf"), default="cf")
    cf.add_argument("--t", required=True, help='grid "t1,t2,..." or "start:stop:num"')
    cf.add_argument("--numeric", action="store_true", help="BDCF by differences of log phi")
    _add_output_flags(cf)

    bd = sub.add_parser("bddf", help="tabulate the BDDF by Gil-Pelaez inversion")
    _add_model_flags(bd)
    bd.add_argument("--a", required=True, help='grid "a1,a2,..." or "start:stop:num"')
    bd.add_argument("--abs-tol", type=float)
    bd.add_argument("--rel-tol", type=float)
    bd.add_argument("--max-segments", type=int)
    bd.add_argument("--accel-terms", type=int)
    bd.add_argument("--workers", type=int, default=1)
    bd.add_argument("--numeric", action="store_true", help="invert the BDCF obtained by differences of log phi")
    _add_output_flags(bd)

    sample = sub.add_parser("sample", help="draw a batch from an exact-law generator")
    sample.add_argument("--gen", required=True, help="one of " + ", ".join(GENERATORS))
    _add_param_flags(sample, c_help="innovation factor c in (0, 1)")
    sample.add_argument("--n", type=int, required=True)
    sample.add_argument("--seed", type=int, help="default: $SELFDECOMP_SEED")
    sample.add_argument("--truncation-n", type=int, default=10_000)
    sample.add_argument("--block-terms", type=int, default=64)
    sample.add_argument("--no-tail-correction", action="store_true")
    sample.add_argument("--streams", type=int, default=1)
    sample.add_argument("--workers", type=int, default=1)
    sample.add_argument("--format", choices=("csv", "json"), default="csv")
    _add_output_flags(sample)

    mo = sub.add_parser("moments", help="mean and variance of X and of its BDRV")
    _add_model_flags(mo)
    _add_output_flags(mo)

    ve = sub.add_parser("verify", help="run the identity verification suite")
    ve.add_argument("--only", help="run only identities whose id contains this text")
    ve.add_argument("--tolerance-scale", type=float, default=1.0)
    ve.add_argument("--seed", type=int, help="default: $SELFDECOMP_SEED")
    ve.add_argument("--workers", type=int, default=1)
    ve.add_argument("--moment-samples", type=int)
    ve.add_argument("--ks-samples", type=int)
    _add_output_flags(ve)
    return parser


def _configure_logging(verbosity):
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv=None, stdout=None):
    """Parse argv, run the subcommand and return its exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    command = COMMANDS[args.command]
    try:
        if args.output:
            with open(args.output, "w", encoding="utf-8", newline="") as out:
                return command(args, out)
        return command(args, stdout or sys.stdout)
    except (ModelDescriptorError, DomainError, ConfigError) as exc:
        print(f"selfdecomp {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, SeriesConvergenceError, NonFiniteError) as exc:
        print(f"selfdecomp {args.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SelfDecompError as exc:
        print(f"selfdecomp {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
