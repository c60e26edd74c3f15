#!/usr/bin/env python3
"""Time the numba kernels against their pure NumPy fallbacks.

Both implementations are importable side by side, so this does not need
ONTORAG_NO_NUMBA; it simply calls each one. Run from a checkout:

    python3 benchmarks/bench_kernels.py --pairs 300 --rows 5000
"""

from __future__ import annotations

import argparse
import string
import time

import numpy as np

from ontorag._kernels import HAVE_NUMBA, _cosine_scan_np, _levenshtein_np, encode_text

if HAVE_NUMBA:
    from ontorag._kernels import _cosine_scan_nb, _levenshtein_nb


def _time(fn, repeats: int = 5) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_levenshtein(pairs: int, rng: np.random.Generator) -> None:
    alphabet = string.ascii_lowercase
    words = []
    for _ in range(pairs):
        n = int(rng.integers(5, 40))
        m = int(rng.integers(5, 40))
        a = "".join(rng.choice(list(alphabet), n))
        b = "".join(rng.choice(list(alphabet), m))
        words.append((encode_text(a), encode_text(b)))

    def run(fn):
        return lambda: sum(fn(a, b) for a, b in words)

    np_best = _time(run(_levenshtein_np))
    print(f"levenshtein  x{pairs:<6} numpy: {np_best * 1e3:8.2f} ms", end="")
    if HAVE_NUMBA:
        _levenshtein_nb(words[0][0], words[0][1])  # compile outside the timer
        nb_best = _time(run(_levenshtein_nb))
        print(f"   numba: {nb_best * 1e3:8.2f} ms   speedup: {np_best / nb_best:5.1f}x")
    else:
        print("   numba: unavailable")


def bench_cosine(rows: int, dim: int, queries: int, rng: np.random.Generator) -> None:
    matrix = np.ascontiguousarray(rng.standard_normal((rows, dim)))
    norms = np.linalg.norm(matrix, axis=1)
    qs = [np.ascontiguousarray(rng.standard_normal(dim)) for _ in range(queries)]
    qnorms = [float(np.linalg.norm(q)) for q in qs]

    def run(fn):
        return lambda: [fn(matrix, norms, q, qn) for q, qn in zip(qs, qnorms)]

    np_best = _time(run(_cosine_scan_np))
    print(f"cosine_scan  {rows}x{dim:<4} numpy: {np_best * 1e3:8.2f} ms", end="")
    if HAVE_NUMBA:
        _cosine_scan_nb(matrix, norms, qs[0], qnorms[0])
        nb_best = _time(run(_cosine_scan_nb))
        print(f"   numba: {nb_best * 1e3:8.2f} ms   speedup: {np_best / nb_best:5.1f}x")
    else:
        print("   numba: unavailable")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pairs", type=int, default=300, help="word pairs for the edit distance bench")
    parser.add_argument("--rows", type=int, default=5000, help="matrix rows for the cosine bench")
    parser.add_argument("--dim", type=int, default=256)
    parser.add_argument("--queries", type=int, default=50)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"numba available: {HAVE_NUMBA}")
    bench_levenshtein(args.pairs, rng)
    bench_cosine(args.rows, args.dim, args.queries, rng)


if __name__ == "__main__":
    main()
