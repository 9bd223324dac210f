"""Compare numba and numpy kernels on a synthetic CRF workload.

    python benchmarks/bench_kernels.py [--sentences 400] [--length 25] [--features 5000]
"""

import argparse
import time

import numpy as np

from redrep import kernels

L = 4


def make_batch(rng, count, length, num_features, active=12):
    batch = []
    for _ in range(count):
        n = int(rng.integers(length // 2, length + 1))
        indptr = np.arange(n + 1, dtype=np.int64) * active
        ids = rng.integers(0, num_features, size=n * active).astype(np.int64)
        vals = np.ones(n * active)
        y = rng.integers(0, L, size=n).astype(np.int64)
        batch.append((indptr, ids, vals, y))
    return batch


def one_epoch(backend, W, T, b, e, batch):
    gW, gT, gb, ge = np.zeros_like(W), np.zeros_like(T), np.zeros_like(b), np.zeros_like(e)
    total = 0.0
    for indptr, ids, vals, y in batch:
        total += backend.crf_accumulate(W, T, b, e, indptr, ids, vals, y, gW, gT, gb, ge, 1.0)
        E = backend.emissions(W, indptr, ids, vals)
        backend.viterbi(E, T, b, e)
    return total


def timed(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sentences", type=int, default=400)
    ap.add_argument("--length", type=int, default=25)
    ap.add_argument("--features", type=int, default=5000)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    W = rng.normal(scale=0.1, size=(L, args.features))
    T = rng.normal(size=(L, L))
    b, e = rng.normal(size=L), rng.normal(size=L)
    batch = make_batch(rng, args.sentences, args.length, args.features)

    results = {}
    for name in ("numpy", "numba"):
        try:
            backend = kernels.get_backend(name)
        except RuntimeError:
            print(f"{name:6s} unavailable")
            continue
        one_epoch(backend, W, T, b, e, batch[:2])  # warm-up / jit compile
        results[name] = timed(lambda: one_epoch(backend, W, T, b, e, batch), args.repeats)
        print(f"{name:6s} {results[name] * 1e3:9.1f} ms per pass ({args.sentences} sentences)")

    if len(results) == 2:
        ll = [one_epoch(kernels.get_backend(n), W, T, b, e, batch) for n in results]
        print(f"speedup {results['numpy'] / results['numba']:.1f}x, loglik diff {abs(ll[0] - ll[1]):.2e}")


if __name__ == "__main__":
    main()
