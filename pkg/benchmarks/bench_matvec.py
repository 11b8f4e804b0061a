"""Benchmark the pairwise-sum backends: compiled extension vs numpy fallback.

Times the truncated-transform matvec (the hot kernel of the operator-norm
power iteration) on uniform atom clouds of growing size, plus one full norm
estimate per size.  Run:

    python benchmarks/bench_matvec.py --sizes 256 512 1024 2048
"""

import argparse
import importlib.util
import time

import numpy as np

from hriesz import _kernels_py
from hriesz.lattice import CubeId
from hriesz.measure import uniform_on_cube
from hriesz.riesz import TruncationPolicy, operator_norm_estimate

UNIT = CubeId(0, (0, 0), 0)


def load_backends():
    backends = {"numpy": _kernels_py}
    if importlib.util.find_spec("hriesz._kernels") is not None:
        from hriesz import _kernels

        backends["compiled"] = _kernels
    return backends


def time_matvec(impl, mu, coef, delta4, repeat):
    out = np.zeros((len(mu), 2 * mu.n))
    impl.pair_sum(mu.zs, mu.ts, mu.zs, mu.ts, coef, delta4, out)  # warm up
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        impl.pair_sum(mu.zs, mu.ts, mu.zs, mu.ts, coef, delta4, out)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[256, 512, 1024, 2048])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--delta", type=float, default=0.05)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--norm-iters", type=int, default=50, help="max power iterations to time")
    args = ap.parse_args()

    backends = load_backends()
    print(f"backends: {', '.join(backends)}")
    print(f"{'N':>6} {'backend':>9} {'matvec (s)':>11} {'Mpairs/s':>9} {'speedup':>8}")
    for size in args.sizes:
        mu = uniform_on_cube(UNIT, size, 1.0, seed=args.seed)
        coef = np.ascontiguousarray(np.ones(size) * mu.weights)
        base = None
        for name, impl in backends.items():
            t = time_matvec(impl, mu, coef, args.delta ** 4, args.repeat)
            rate = size * size / t / 1e6
            if name == "numpy":
                base = t
                speed = ""
            else:
                speed = f"{base / t:7.1f}x"
            print(f"{size:>6} {name:>9} {t:>11.5f} {rate:>9.1f} {speed:>8}")

    print("\noperator-norm estimate (active backend, capped iterations):")
    for size in args.sizes:
        mu = uniform_on_cube(UNIT, size, 1.0, seed=args.seed)
        t0 = time.perf_counter()
        est = operator_norm_estimate(
            mu, TruncationPolicy(args.delta), max_iters=args.norm_iters, seed=args.seed
        )
        dt = time.perf_counter() - t0
        print(f"  N={size:>5}: value={est.value:.6g} iters={est.iterations} time={dt:.2f}s")


if __name__ == "__main__":
    main()
