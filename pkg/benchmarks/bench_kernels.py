"""Time the numba kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--days 5000] [--assets 10] [--repeat 20]
"""

import argparse
import timeit

import numpy as np

from clipfolio import _kernels


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--days", type=int, default=5000)
    ap.add_argument("--assets", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    gen = np.random.default_rng(0)
    rets = gen.normal(0.0003, 0.01, (args.days, args.assets))
    starts = np.arange(0, args.days, 21, dtype=np.int64)
    targets = gen.dirichlet(np.ones(args.assets), size=starts.size)
    curve = np.cumprod(1 + rets[:, 0])

    cases = {"simulate": (lambda f: f(rets, targets, starts), "simulate"),
             "max_drawdown": (lambda f: f(curve), "max_drawdown")}
    print(f"{'kernel':<14}{'path':<8}{'ms/call':>10}")
    for label, (call, stem) in cases.items():
        paths = {"numpy": getattr(_kernels, f"{stem}_numpy")}
        if _kernels.HAVE_NUMBA:
            fn = getattr(_kernels, f"{stem}_numba")
            call(fn)  # compile outside the timed region
            paths["numba"] = fn
        for name, fn in paths.items():
            best = min(timeit.repeat(lambda: call(fn), number=1, repeat=args.repeat))
            print(f"{label:<14}{name:<8}{best * 1e3:>10.3f}")
    if not _kernels.HAVE_NUMBA:
        print("numba unavailable or disabled; only the numpy path was timed")


if __name__ == "__main__":
    main()
