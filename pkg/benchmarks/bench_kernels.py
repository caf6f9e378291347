"""Time the numba kernels against their numpy fallbacks.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Each row reports the best of N runs after one warm-up call, so JIT
compilation is excluded.  Results also print the largest difference between
the two paths.
"""
import argparse
import time

import numpy as np
import scipy.sparse

from fracdim import _kernels, beam


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_thomas(n):
    rng = np.random.default_rng(0)
    lower, upper = rng.uniform(-1, 1, n), rng.uniform(-1, 1, n)
    diag = 4.0 + rng.uniform(0, 1, n)
    rhs = rng.uniform(-1, 1, n)
    return lambda k: k.thomas(lower, diag, upper, rhs)


def bench_band(n):
    model = beam.TimoshenkoModel(beam.BeamConfig(G=10.0), nodes=n)
    eff = scipy.sparse.diags(model.mass_diagonal()) + 1e-4 * model.stiffness()
    ab = model._banded(eff.tocsr())
    rhs = np.random.default_rng(1).uniform(-1, 1, ab.shape[1])

    def run(k):
        cb = k.band_cholesky(ab)
        return k.band_cho_solve(cb, rhs)

    return run


def bench_newmark(nodes, steps):
    cfg = beam.BeamConfig(alpha=0.8, G=10.0)

    def run(k):
        model = beam.TimoshenkoModel(cfg, nodes)
        model.kernels = k
        s = model.initial_state(lambda x: 0.01 * x * x)
        return model.simulate(s, 0.05, steps, every=steps).total

    return run


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels.JIT is None:
        raise SystemExit("numba is not importable; nothing to compare")
    cases = [
        ("thomas n=2001", bench_thomas(2001)),
        ("thomas n=100000", bench_thomas(100_000)),
        ("band cholesky+solve, 400 nodes", bench_band(400)),
        ("newmark 400 nodes x 2000 steps", bench_newmark(400, 2000)),
    ]
    print(f"{'kernel':34s} {'numba [ms]':>11s} {'numpy [ms]':>11s} {'speed-up':>9s} {'max diff':>10s}")
    for name, fn in cases:
        tj, oj = best_of(lambda: fn(_kernels.JIT), args.repeat)
        tn, on = best_of(lambda: fn(_kernels.NUMPY), args.repeat)
        diff = float(np.max(np.abs(np.asarray(oj) - np.asarray(on))))
        print(f"{name:34s} {1e3 * tj:11.3f} {1e3 * tn:11.3f} {tn / tj:9.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
