"""``spdkit`` command-line interface.

Exit codes: 0 ok, 2 input error, 3 numerical failure, 4 non-convergence,
5 indefinite kernel, 6 law violation. ``SPDKIT_SEED`` overrides the default
seed 0 of ``laws``, ``bench`` and ``search``.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from . import bench, laws
from ._backend import BACKEND
from .bundle import MatrixBundle, parse_bundle, write_bundle
from .divergences import (
    bregman,
    delta_s_metric,
    log_euclidean,
    riemannian,
    s_div,
    thompson,
)
from .errors import InputError, MaxItersExceeded, NumericalError
from .kernels import VARIANTS, GramSpec, gram_matrix, search_indefinite
from .means import MeanProblem, SolverConfig, geometric_mean, karcher_mean, le_mean, s_mean

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_NOT_CONVERGED = 4
EXIT_INDEFINITE = 5
EXIT_LAW_VIOLATION = 6

METRICS = {
    "sdiv": s_div,
    "sdelta": delta_s_metric,
    "riem": riemannian,
    "logeuclid": log_euclidean,
    "thompson": thompson,
    "stein_loss": lambda a, b: bregman("neg_log", a, b),
    "vonneumann": lambda a, b: bregman("xlogx_minus_x", a, b),
}
MEAN_KINDS = ("sdiv", "karcher", "logeuclid", "gm2")


class UsageError(InputError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def format_value(x):
    """Fixed-point text with 15 significant digits (15 decimals for zero)."""
    x = float(x)
    if x == 0.0 or not math.isfinite(x):
        return f"{x:.15f}"
    exp10 = math.floor(math.log10(abs(x)))
    if exp10 >= 15:
        return f"{x:.14e}"
    return f"{x:.{14 - exp10}f}"


def _int_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("expected positive integers")
    return values


def _float_list(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


def _default_seed():
    raw = os.environ.get("SPDKIT_SEED")
    if raw is None or raw == "":
        return 0
    try:
        return int(raw, 0)
    except ValueError:
        raise UsageError(f"SPDKIT_SEED must be an integer, got {raw!r}") from None


def _single(path):
    b = parse_bundle(path)
    if len(b) != 1:
        raise UsageError(f"{path}: expected a single-matrix bundle, found {len(b)} items")
    return b.matrices[0]


# Commands --------------------------------------------------------------------


def cmd_dist(args, out):
    A, B = _single(args.file_a), _single(args.file_b)
    print(format_value(METRICS[args.metric](A, B)), file=out)
    return EXIT_OK


def cmd_mean(args, out):
    b = parse_bundle(args.bundle)
    problem = MeanProblem(tuple(b.matrices), b.weights)
    config = SolverConfig(tol=args.tol, max_iters=args.max_iters)
    report = None
    if args.kind == "sdiv":
        report = s_mean(problem, config)
        mean = report.mean
    elif args.kind == "karcher":
        report = karcher_mean(problem, config)
        mean = report.mean
    elif args.kind == "logeuclid":
        mean = le_mean(problem)
    else:
        if len(b) != 2:
            raise UsageError(f"gm2 needs exactly 2 matrices, bundle has {len(b)}")
        mean = geometric_mean(*b.matrices)
    if report is None:
        print(f"kind={args.kind} closed form", file=out)
    else:
        status = "converged" if report.converged else "not converged"
        print(
            f"kind={args.kind} iterations={report.iterations} "
            f"residual={report.residual:.6e} {status}",
            file=out,
        )
    if args.out:
        write_bundle(MatrixBundle(b.n, (("mean", mean),)), args.out)
    else:
        np.savetxt(out, mean.data, fmt="%.17g")
    if report is not None and not report.converged:
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_kernel(args, out):
    b = parse_bundle(args.bundle)
    r = gram_matrix(GramSpec(b, args.beta, args.variant))
    print(f"min_eig={r.min_eig:.6e}", file=out)
    print(f"max_eig={r.max_eig:.6e}", file=out)
    print(f"psd={'yes' if r.psd else 'no'}", file=out)
    print(f"beta_admissible={'yes' if r.beta_admissible else 'no'} (n={b.n})", file=out)
    return EXIT_OK if r.psd else EXIT_INDEFINITE


def cmd_search(args, out):
    found = search_indefinite(args.n, args.beta, args.budget, args.seed)
    if found is None:
        print(f"no indefinite Gram within {args.budget} trials (inconclusive)", file=out)
        return EXIT_OK
    r = gram_matrix(GramSpec(found, args.beta))
    print(f"indefinite bundle found: min_eig={r.min_eig:.6e} max_eig={r.max_eig:.6e}", file=out)
    if args.out:
        write_bundle(found, args.out)
    return EXIT_INDEFINITE


def cmd_laws(args, out):
    ids = laws.LAW_IDS if args.law == "all" else (args.law,)
    for law_id in ids:
        if law_id not in laws.REGISTRY:
            raise UsageError(f"unknown law {law_id!r}; known: {', '.join(laws.LAW_IDS)}")
    reports = []
    print(f"{'law':30s} {'trials':>7s} {'viol':>5s} {'err':>5s} {'worst_margin':>13s}  result", file=out)
    for law_id in ids:
        spec = laws.LawSpec(
            law_id,
            trials=args.trials,
            seed=args.seed,
            dims=tuple(args.dims),
            cond_target=tuple(args.conds),
            threads=args.threads,
        )
        r = laws.run_law(spec)
        reports.append(r)
        verdict = "pass" if r.passed else "FAIL"
        print(
            f"{law_id:30s} {r.trials_run:7d} {r.violations:5d} {r.errored:5d} "
            f"{r.worst_margin:13.3e}  {verdict}",
            file=out,
        )
    failed = [r for r in reports if not r.passed]
    if args.json:
        doc = {
            "seed": args.seed,
            "dims": list(args.dims),
            "cond_target": list(args.conds),
            "backend": BACKEND,
            "reports": [r.to_dict() for r in reports],
        }
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    for r in failed:
        print(f"witness {r.law_id}: {r.witness}", file=out)
    print(f"{len(reports) - len(failed)}/{len(reports)} laws passed", file=out)
    return EXIT_LAW_VIOLATION if failed else EXIT_OK


def cmd_bench(args, out):
    for op in args.op:
        if op not in bench.OPS:
            raise UsageError(f"unknown op {op!r}; expected one of {', '.join(bench.OPS)}")
    if args.reps < 1:
        raise UsageError("--reps must be >= 1")
    results = bench.run_bench(args.op, args.dims, args.m, args.reps, args.seed)
    bench.write_csv(results, args.out if args.out else out)
    if args.out:
        print(f"wrote {len(results)} rows to {args.out}", file=out)
    return EXIT_OK


# Parser ----------------------------------------------------------------------


def build_parser():
    p = _Parser(prog="spdkit", description="S-divergence tools for SPD matrices.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("dist", help="distance or divergence between two single-matrix bundles")
    d.add_argument("metric", choices=sorted(METRICS))
    d.add_argument("file_a")
    d.add_argument("file_b")
    d.set_defaults(func=cmd_dist)

    m = sub.add_parser("mean", help="mean of a bundle")
    m.add_argument("kind", choices=MEAN_KINDS)
    m.add_argument("bundle")
    m.add_argument("--tol", type=float, default=1e-12)
    m.add_argument("--max-iters", type=int, default=1000)
    m.add_argument("--out", help="write the mean as a single-matrix bundle")
    m.set_defaults(func=cmd_mean)

    k = sub.add_parser("kernel", help="Gram matrix of det(X_i + X_j)^-beta")
    k.add_argument("bundle")
    k.add_argument("--beta", type=float, required=True)
    k.add_argument("--variant", choices=VARIANTS, default="det_sum")
    k.set_defaults(func=cmd_kernel)

    s = sub.add_parser("search", help="random search for an indefinite determinant kernel")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--beta", type=float, required=True)
    s.add_argument("--budget", type=int, default=10000)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--out", help="write the witness bundle here")
    s.set_defaults(func=cmd_search)

    law = sub.add_parser("laws", help="randomized checks of the registered laws")
    law.add_argument("--law", default="all", help="law id or 'all'")
    law.add_argument("--trials", type=int, default=1000)
    law.add_argument("--seed", type=int, default=None)
    law.add_argument("--dims", type=_int_list, default=list(laws.DEFAULT_DIMS))
    law.add_argument("--conds", type=_float_list, default=list(laws.DEFAULT_CONDS))
    law.add_argument("--json", help="write machine-readable reports here")
    law.add_argument("--threads", type=int, default=1, help="worker processes for trials")
    law.set_defaults(func=cmd_laws)

    b = sub.add_parser("bench", help="time distances and means, CSV output")
    b.add_argument("--op", type=lambda t: t.split(","), default=list(bench.OPS))
    b.add_argument("--dims", type=_int_list, default=[16, 32, 64, 128])
    b.add_argument("--m", type=_int_list, default=[10])
    b.add_argument("--reps", type=int, default=10)
    b.add_argument("--seed", type=int, default=None)
    b.add_argument("--out", help="CSV path (default: standard output)")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "seed", 0) is None:
            args.seed = _default_seed()
        if args.command == "laws" and args.trials < 1:
            raise UsageError("--trials must be >= 1")
        return args.func(args, out)
    except MaxItersExceeded as exc:
        print(f"spdkit: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except InputError as exc:
        print(f"spdkit: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"spdkit: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"spdkit: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
