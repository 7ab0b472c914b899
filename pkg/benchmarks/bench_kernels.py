"""Compare the compiled GF(q) kernels against the pure-Python fallback.

Times the two hot paths behind every Matrix operation: dense multiply
and in-place Gauss-Jordan elimination, at the shapes the retrieval and
repair paths actually use plus a couple of larger ones for headroom.

Run:  python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import random
import time
from array import array

from pmsr import _kernels_py as py_impl

try:
    from pmsr import _kernels as c_impl
except ImportError:
    c_impl = None

Q = 257
MUL_SHAPES = [
    # (n, m, p): out[n x p] = a[n x m] . b[m x p]
    (6, 4, 4),      # encoding: psi . message
    (3, 6, 1),      # one node answering a 3-subquery retrieval
    (8, 8, 8),
    (32, 32, 32),
    (96, 96, 96),
]
GJ_SHAPES = [
    # (rows, cols, pivot_cols): augmented solves and rank checks
    (4, 5, 4),      # interference system with its right-hand side
    (4, 8, 4),      # 4x4 inversion
    (8, 16, 8),
    (32, 64, 32),
    (96, 192, 96),
]


def time_call(fn, repeats):
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return min(samples)


def bench_mul(impl, a, b, n, m, p, repeats):
    out = array("Q", bytes(8 * n * p))
    return time_call(lambda: impl.mat_mul(a, b, out, n, m, p, Q), repeats)


def bench_gj(impl, flat, rows, cols, pivot_cols, repeats):
    def run():
        data = array("Q", flat)  # elimination is in place; copy each round
        impl.gauss_jordan(data, rows, cols, pivot_cols, Q)

    return time_call(run, repeats)


def fmt_seconds(value):
    if value < 1e-3:
        return f"{value * 1e6:8.1f} us"
    return f"{value * 1e3:8.2f} ms"


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=200,
                        help="timing repeats per case (default 200)")
    args = parser.parse_args()
    if c_impl is None:
        print("compiled kernels are not built; nothing to compare")
        return

    rng = random.Random(1)
    print(f"GF({Q}), best of {args.repeats} runs per case\n")
    header = f"{'case':<24} {'python':>12} {'cython':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))

    for n, m, p in MUL_SHAPES:
        a = array("Q", (rng.randrange(Q) for _ in range(n * m)))
        b = array("Q", (rng.randrange(Q) for _ in range(m * p)))
        t_py = bench_mul(py_impl, a, b, n, m, p, args.repeats)
        t_c = bench_mul(c_impl, a, b, n, m, p, args.repeats)
        case = f"mat_mul {n}x{m} . {m}x{p}"
        print(f"{case:<24} {fmt_seconds(t_py)} {fmt_seconds(t_c)} {t_py / t_c:8.1f}x")

    for rows, cols, pivot_cols in GJ_SHAPES:
        flat = [rng.randrange(Q) for _ in range(rows * cols)]
        t_py = bench_gj(py_impl, flat, rows, cols, pivot_cols, args.repeats)
        t_c = bench_gj(c_impl, flat, rows, cols, pivot_cols, args.repeats)
        case = f"gauss_jordan {rows}x{cols}"
        print(f"{case:<24} {fmt_seconds(t_py)} {fmt_seconds(t_c)} {t_py / t_c:8.1f}x")

    print("\nspeedup = python time / cython time (higher is better)")


if __name__ == "__main__":
    main()
