"""Timing harness for distances and means.

Each operation is warmed up once and then timed ``reps`` times on the same
seeded inputs; results carry the median and the 10th/90th percentiles.
BLAS is limited to one thread while timing when ``threadpoolctl`` is
importable.
"""

import contextlib
import csv
import time
from dataclasses import dataclass

import numpy as np

from .divergences import _log_euclidean, _riemannian, _s_div
from .errors import InvalidParameter
from .means import MeanProblem, SolverConfig, karcher_mean, le_mean, s_mean
from .pdcore import _random_spd

DIST_OPS = ("dist_sdiv", "dist_riem", "dist_logeuclid")
MEAN_OPS = ("mean_sdiv", "mean_karcher", "mean_logeuclid")
OPS = DIST_OPS + MEAN_OPS
CSV_HEADER = ("op", "n", "m", "median_s", "p10_s", "p90_s", "reps")
BENCH_COND = 100.0


@dataclass(frozen=True)
class BenchResult:
    operation: str
    n: int
    m: int
    median_seconds: float
    p10: float
    p90: float
    repetitions: int

    def row(self):
        m = "" if self.operation in DIST_OPS else self.m
        return (
            self.operation,
            self.n,
            m,
            f"{self.median_seconds:.6e}",
            f"{self.p10:.6e}",
            f"{self.p90:.6e}",
            self.repetitions,
        )


@contextlib.contextmanager
def single_thread():
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        yield
        return
    with threadpool_limits(limits=1):
        yield


def _workload(op, n, m, seed):
    rng = np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, n, m])
    if op in DIST_OPS:
        x = _random_spd(n, rng, BENCH_COND)
        y = _random_spd(n, rng, BENCH_COND)
        fn = {"dist_sdiv": _s_div, "dist_riem": _riemannian, "dist_logeuclid": _log_euclidean}[op]
        return lambda: fn(x, y)
    problem = MeanProblem(tuple(_random_spd(n, rng, BENCH_COND) for _ in range(m)))
    if op == "mean_sdiv":
        return lambda: s_mean(problem, SolverConfig(tol=1e-10)).raise_for_status()
    if op == "mean_karcher":
        return lambda: karcher_mean(problem, SolverConfig(tol=1e-10)).raise_for_status()
    return lambda: le_mean(problem)


def time_op(op, n, m=1, reps=10, seed=0):
    """Time one operation; ``m`` is ignored for distances."""
    if op not in OPS:
        raise InvalidParameter(f"unknown benchmark op {op!r}; expected one of {OPS}")
    if int(reps) < 1 or int(n) < 1 or int(m) < 1:
        raise InvalidParameter("reps, n and m must be >= 1")
    fn = _workload(op, int(n), int(m), int(seed))
    with single_thread():
        fn()
        samples = []
        for _ in range(int(reps)):
            t0 = time.perf_counter()
            fn()
            samples.append(time.perf_counter() - t0)
    p10, med, p90 = np.percentile(samples, [10, 50, 90])
    return BenchResult(op, int(n), int(m), float(med), float(p10), float(p90), int(reps))


def run_bench(ops, dims, ms=(10,), reps=10, seed=0):
    """Time every op at every size; means are timed for each bundle size in ``ms``."""
    out = []
    for op in ops:
        for n in dims:
            for m in ms if op in MEAN_OPS else (1,):
                out.append(time_op(op, n, m, reps, seed))
    return out


def write_csv(results, path_or_file):
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="", encoding="utf-8") if own else path_or_file
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in results:
            writer.writerow(r.row())
    finally:
        if own:
            fh.close()
