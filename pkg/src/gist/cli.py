"""Command-line benchmark harness.

``gist run`` solves one problem with several algorithm variants and writes a
CSV trace plus a JSON summary per variant. ``gist verify-prox`` checks the
closed-form proximal maps against a grid search.

Exit codes: 0 success, 1 usage error, 2 data error, 3 solver failure.
"""

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from . import harness
from .data_io import LibsvmParseError, binarize_multiclass, load_libsvm, synthesize
from .losses import Loss
from .penalties import Family, Penalty
from .solver import SolverConfig, Termination

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SOLVER = 0, 1, 2, 3

_SYNTH_KEYS = {"n": int, "d": int, "density": float, "seed": int, "sparsity": int,
               "noise": float, "scale": float}


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def parse_synthetic(spec):
    """``"n=200,d=1000,density=0.01,seed=7"`` -> keyword dict for ``synthesize``.

    ``sparsity`` (default ``min(d, 10)``), ``noise`` and ``scale`` are optional.
    """
    out = {}
    for part in filter(None, (p.strip() for p in spec.split(","))):
        key, sep, val = part.partition("=")
        key = key.strip()
        if not sep or key not in _SYNTH_KEYS:
            raise UsageError("bad --synthetic entry %r (keys: %s)"
                             % (part, ", ".join(_SYNTH_KEYS)))
        try:
            out[key] = _SYNTH_KEYS[key](val)
        except ValueError:
            raise UsageError("bad value in --synthetic entry %r" % part) from None
    missing = [k for k in ("n", "d", "density") if k not in out]
    if missing:
        raise UsageError("--synthetic needs %s" % ", ".join(missing))
    out.setdefault("seed", 0)
    out.setdefault("sparsity", min(out["d"], 10))
    return out


def build_parser():
    parser = _Parser(prog="gist", description="GIST sparse-learning benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run solver variants and write traces")
    run.add_argument("--loss", choices=["logistic", "least_squares"], default="logistic")
    run.add_argument("--penalty", choices=[f.value for f in Family], default="capped_l1")
    run.add_argument("--lambda", dest="lam", type=float, required=True)
    run.add_argument("--theta", type=float, default=None,
                     help="penalty shape parameter (ignored for l1)")
    run.add_argument("--variants", default=",".join(harness.VARIANTS),
                     help="comma-separated subset of: " + ", ".join(harness.VARIANTS))
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="LIBSVM file")
    src.add_argument("--synthetic", help="generator spec, e.g. n=200,d=1000,density=0.01,seed=7")
    run.add_argument("--dims", type=_positive_int, default=None,
                     help="feature count for --data (default: largest index seen)")
    run.add_argument("--out", default="gist_out", help="output directory")
    run.add_argument("--sigma", type=float, default=1e-5)
    run.add_argument("--m", type=int, default=5, help="non-monotone window length")
    run.add_argument("--eta", type=float, default=2.0)
    run.add_argument("--t-min", type=float, default=1e-30)
    run.add_argument("--t-max", type=float, default=1e30)
    run.add_argument("--rel-tol", type=float, default=1e-5)
    run.add_argument("--max-iters", type=_positive_int, default=1000)
    run.add_argument("--max-ls-trials", type=_positive_int, default=100)
    run.add_argument("--ms-stages", type=_positive_int, default=10)
    run.add_argument("--parallel", action="store_true", help="one worker thread per variant")

    ver = sub.add_parser("verify-prox", help="closed-form prox vs grid oracle")
    ver.add_argument("--samples", type=_positive_int, default=2000, help="problems per family")
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--grid-step", type=float, default=1e-4)
    ver.add_argument("--full-grid", action="store_true",
                     help="scan the whole interval instead of only between 0 and u")
    return parser


def _load_data(args):
    if args.data is not None:
        try:
            ds = load_libsvm(args.data, args.dims)
        except OSError as exc:
            raise DataError("cannot read %s: %s" % (args.data, exc)) from None
        except LibsvmParseError as exc:
            raise DataError("%s: %s" % (args.data, exc)) from None
        if args.loss == "logistic":
            try:
                ds = binarize_multiclass(ds)
            except ValueError as exc:
                raise DataError(str(exc)) from None
        return ds, {"data": os.path.abspath(args.data)}
    spec = parse_synthetic(args.synthetic)
    try:
        ds, _ = synthesize(spec["n"], spec["d"], spec["density"], spec["sparsity"],
                           noise=spec.get("noise", 0.0), seed=spec["seed"], task=args.loss,
                           scale=spec.get("scale", 1.0))
    except ValueError as exc:
        raise UsageError("--synthetic: %s" % exc) from None
    return ds, {"synthetic": spec}


def _variants(spec):
    names = [v.strip() for v in spec.split(",") if v.strip()]
    unknown = [v for v in names if v not in harness.VARIANTS]
    if unknown or not names:
        raise UsageError("unknown variant(s) %s; choose from %s"
                         % (", ".join(unknown) or "<none>", ", ".join(harness.VARIANTS)))
    return list(dict.fromkeys(names))


def run_benchmark(args, stdout=None):
    stdout = sys.stdout if stdout is None else stdout
    variants = _variants(args.variants)
    family = Family(args.penalty)
    if family is not Family.L1 and args.theta is None:
        raise UsageError("--theta is required for penalty %s" % family.value)
    try:
        penalty = Penalty(family, args.lam, 1.0 if args.theta is None else args.theta)
        base = SolverConfig(eta=args.eta, sigma=args.sigma, window_m=args.m,
                            t_min=args.t_min, t_max=args.t_max, rel_tol=args.rel_tol,
                            max_outer_iters=args.max_iters,
                            max_line_search_trials=args.max_ls_trials)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    ds, source = _load_data(args)
    try:
        loss = Loss(args.loss, ds.X, ds.y)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    os.makedirs(args.out, exist_ok=True)

    def job(name):
        result = harness.run_variant(name, loss, penalty, base, ms_stages=args.ms_stages)
        cfg = harness.variant_config(name, base)
        echo = harness.config_echo(cfg, loss=args.loss, penalty=family.value, lam=args.lam,
                                   theta=penalty.theta, ms_stages=args.ms_stages, **source)
        with open(os.path.join(args.out, name + ".csv"), "w", newline="") as fh:
            harness.trace_csv(result, with_stage=(name == "ms"), stream=fh)
        with open(os.path.join(args.out, name + ".json"), "w") as fh:
            fh.write(harness.dumps(harness.summary(name, result, echo)) + "\n")
        return result

    if args.parallel:
        with ThreadPoolExecutor(max_workers=len(variants)) as pool:
            results = list(pool.map(job, variants))
    else:
        results = [job(v) for v in variants]

    status = EXIT_OK
    for name, r in zip(variants, results):
        print("%-10s f=%.10g iters=%d termination=%s residual=%.3g"
              % (name, r.final_objective, r.iterations, r.termination.value,
                 r.critical_point_residual), file=stdout)
        if r.termination is Termination.LINE_SEARCH_EXHAUSTED:
            status = EXIT_SOLVER
    return status


def verify_prox(args, stdout=None):
    stdout = sys.stdout if stdout is None else stdout
    if not args.grid_step > 0:
        raise UsageError("--grid-step must be positive")
    t0 = time.perf_counter()
    gaps = harness.prox_oracle_gap(args.samples, seed=args.seed, grid_step=args.grid_step,
                                   full_grid=args.full_grid)
    worst = max(g[0] for g in gaps.values())
    for fam, (hi, lo) in gaps.items():
        print("%-10s max gap %+.3e  grid slack %.3e" % (fam, hi, max(0.0, -lo)), file=stdout)
    ok = worst <= 1e-6
    print("max h-gap %.3e over %d samples/family in %.1fs: %s"
          % (worst, args.samples, time.perf_counter() - t0, "ok" if ok else "FAILED"),
          file=stdout)
    return EXIT_OK if ok else EXIT_SOLVER


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    # Bare flags mean "run".
    if argv and argv[0].startswith("--") and argv[0] not in ("--help",):
        argv = ["run"] + argv
    try:
        args = build_parser().parse_args(argv)
        if args.command == "run":
            return run_benchmark(args)
        return verify_prox(args)
    except UsageError as exc:
        print("gist: error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print("gist: data error: %s" % exc, file=sys.stderr)
        return EXIT_DATA
    except (ArithmeticError, FloatingPointError) as exc:
        print("gist: solver failure: %s" % exc, file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
