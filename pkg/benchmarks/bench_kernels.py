"""Time the numba kernels against their numpy / plain-Python twins.

    python3 benchmarks/bench_kernels.py [--n-enum 40] [--size 200] [--repeat 3]

Each kernel runs once to warm the JIT cache before timing.  Results of the
two paths are compared so the benchmark doubles as an equivalence check.
"""
import argparse
import time

import numpy as np

from polyseries import enumeration, modlinalg
from polyseries._accel import USE_NUMBA
from polyseries.exactarith import generate_prime_batch


def best_of(fn, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-enum", type=int, default=40, help="half-perimeter for the enumeration kernel")
    ap.add_argument("--size", type=int, default=200, help="matrix size for modular elimination")
    ap.add_argument("--walk-n", type=int, default=8, help="half-perimeter for the brute-force walker")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not USE_NUMBA:
        print("numba disabled (POLYSERIES_DISABLE_NUMBA set or numba missing); nothing to compare")
        return 0
    p = generate_prime_batch(1)[0]
    rng = np.random.default_rng(0)
    A = rng.integers(0, p, size=(args.size, args.size + 1), dtype=np.int64)

    rows = []
    for backend in ("numba", "numpy"):
        enumeration.enumerate_imperfect(8, p, backend=backend)
        s, t = best_of(lambda: enumeration.enumerate_imperfect(args.n_enum, p, backend=backend),
                       args.repeat)
        rows.append(("imperfect enumeration", backend, t, tuple(s.coeffs)))
        modlinalg.rref_mod(A[:4, :5], p, backend)
        (R, rank, _), t = best_of(lambda: modlinalg.rref_mod(A, p, backend), args.repeat)
        rows.append(("modular RREF", backend, t, R.tobytes()))

    walk = enumeration._walk_dfs
    args_w = (args.walk_n, enumeration._DX, enumeration._DY, enumeration._ALLOWED)
    walk(2, *args_w[1:])
    out, t = best_of(lambda: walk(*args_w), args.repeat)
    rows.append(("brute-force walker", "numba", t, tuple(out)))
    out, t = best_of(lambda: walk.py_func(*args_w), 1)
    rows.append(("brute-force walker", "python", t, tuple(out)))

    print(f"{'kernel':<24}{'backend':<9}{'seconds':>10}{'speedup':>10}  match")
    by_kernel = {}
    for name, backend, t, res in rows:
        by_kernel.setdefault(name, []).append((backend, t, res))
    for name, runs in by_kernel.items():
        (b0, t0, r0), (b1, t1, r1) = runs
        print(f"{name:<24}{b0:<9}{t0:>10.4f}{'':>10}")
        print(f"{'':<24}{b1:<9}{t1:>10.4f}{t1 / t0:>9.1f}x  {'yes' if r0 == r1 else 'NO'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
