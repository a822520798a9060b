"""Compare the compiled kernels with their numpy fallbacks.

Usage::

    python3 benchmarks/bench_backends.py [--reps 200] [--out backends.csv]

Each kernel is timed on identical seeded inputs under both backends and the
speedup (numpy median / compiled median) is reported. Results are also
checked for agreement.
"""

import argparse
import csv
import sys
import time

import numpy as np

from spdkit import _backend
from spdkit.bench import single_thread
from spdkit.pdcore import _random_spd


def _median_time(fn, reps):
    fn()
    samples = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return float(np.median(samples))


def _cases(rng):
    for n in (2, 5, 10, 32):
        x = _random_spd(n, rng, 100.0)
        y = _random_spd(n, rng, 100.0)
        yield "s_div_raw", n, 1, (x, y)
        yield "spd_inverse", n, 1, (x,)
    for n, m in ((3, 8), (10, 8), (10, 32)):
        stack = np.ascontiguousarray([_random_spd(n, rng, 100.0) for _ in range(m)])
        yield "pair_logdets", n, m, (stack,)
        w = np.full(m, 1.0 / m)
        x0 = np.ascontiguousarray(stack.mean(axis=0))
        yield "picard", n, m, (stack, w, x0, 1e-12, 1e-8, 5000)


def _first(result):
    return result[0] if isinstance(result, tuple) else result


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--out")
    args = p.parse_args(argv)

    names = _backend.available()
    if "cython" not in names:
        print("compiled kernels are not built; only the numpy fallback is available")
        return 1
    fast, slow = _backend.get("cython"), _backend.get("numpy")
    rows = []
    rng = np.random.default_rng(7)
    with single_thread():
        for kernel, n, m, inputs in _cases(rng):
            f_fast = getattr(fast, kernel)
            f_slow = getattr(slow, kernel)
            diff = float(np.max(np.abs(np.asarray(_first(f_fast(*inputs))) - _first(f_slow(*inputs)))))
            reps = max(5, args.reps // (10 if kernel == "picard" else 1))
            t_fast = _median_time(lambda: f_fast(*inputs), reps)
            t_slow = _median_time(lambda: f_slow(*inputs), reps)
            rows.append((kernel, n, m, t_fast, t_slow, t_slow / t_fast, diff))

    header = ("kernel", "n", "m", "cython_s", "numpy_s", "speedup", "max_abs_diff")
    print(f"{header[0]:14s} {'n':>3s} {'m':>3s} {'cython_s':>11s} {'numpy_s':>11s} {'speedup':>8s} {'max_diff':>9s}")
    for k, n, m, tf, ts, sp, d in rows:
        print(f"{k:14s} {n:3d} {m:3d} {tf:11.3e} {ts:11.3e} {sp:8.1f} {d:9.1e}")
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
