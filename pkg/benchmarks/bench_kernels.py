"""Benchmark the compiled kernels against the NumPy fallback.

Two hot loops dominate runtime: candidate scoring during selection (one
fused three-variable counting pass plus seven entropies per candidate
per step) and the k-NN distance/top-k work during evaluation sweeps.
The workloads below mirror those call patterns at the scale of a
145x145 scene with ~10k labeled pixels.

Run:  python3 benchmarks/bench_kernels.py [--samples N] [--calls N]

To benchmark an end-to-end pipeline with the fallback instead, run it
with BANDSELECT_PURE_PYTHON=1.
"""

import argparse
import time

import numpy as np

from bandselect._core import _hist_py

try:
    from bandselect._core import _histcore
except ImportError:
    _histcore = None


def make_workload(rng, n_samples, alphabet):
    a = np.ascontiguousarray(rng.integers(0, alphabet, n_samples),
                             dtype=np.int32)
    b = np.ascontiguousarray(rng.integers(0, alphabet, n_samples),
                             dtype=np.int32)
    c = np.ascontiguousarray(rng.integers(0, alphabet, n_samples),
                             dtype=np.int32)
    return a, b, c


def bench(impl, fn_name, args_list, repeat):
    fn = getattr(impl, fn_name)
    best = float("inf")
    result = None
    for _ in range(repeat):
        start = time.perf_counter()
        for args in args_list:
            result = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=10366,
                        help="coded vector length (default: 10366)")
    parser.add_argument("--calls", type=int, default=200,
                        help="kernel calls per timing (default: 200)")
    parser.add_argument("--repeat", type=int, default=3,
                        help="timing repetitions, best kept (default: 3)")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    small = [make_workload(rng, args.samples, 16) for _ in range(args.calls)]

    n_train = args.samples // 2
    test_block = rng.random((256, 40))
    train_t = np.ascontiguousarray(rng.random((n_train, 40)).T)
    d2_rows = [rng.random((256, n_train)) for _ in range(8)]

    cases = [
        ("entropy_terms3 (alphabet 16)",
         "entropy_terms3",
         [(a, b, c, 16, 16, 16) for a, b, c in small]),
        ("entropy_terms2 (alphabet 256)",
         "entropy_terms2",
         [(np.ascontiguousarray(rng.integers(0, 256, args.samples),
                                dtype=np.int32),
           np.ascontiguousarray(rng.integers(0, 16, args.samples),
                                dtype=np.int32), 256, 16)
          for _ in range(args.calls)]),
        ("joint_entropy_bits 3-var (alphabet 16)",
         "joint_entropy_bits",
         [((a, b, c), (16, 16, 16)) for a, b, c in small]),
        ("sq_distances (256 x 5k x 40 bands)",
         "sq_distances",
         [(test_block, train_t) for _ in range(8)]),
        ("nearest_k (256 x 5k, k=3)",
         "nearest_k",
         [(d2, 3) for d2 in d2_rows]),
    ]

    print(f"{args.calls} calls x {args.samples} samples, best of "
          f"{args.repeat}\n")
    print(f"{'kernel':<42}{'numpy':>12}{'compiled':>12}{'speedup':>10}")
    for label, fn_name, call_args in cases:
        slow, slow_val = bench(_hist_py, fn_name, call_args, args.repeat)
        if _histcore is None:
            print(f"{label:<42}{slow * 1e3:>10.1f}ms{'-':>12}{'-':>10}")
            continue
        fast, fast_val = bench(_histcore, fn_name, call_args, args.repeat)
        drift = np.max(np.abs(np.subtract(slow_val, fast_val)))
        assert drift < 1e-9, f"backends disagree by {drift}"
        print(f"{label:<42}{slow * 1e3:>10.1f}ms{fast * 1e3:>10.1f}ms"
              f"{slow / fast:>9.1f}x")
    if _histcore is None:
        print("\ncompiled kernels not built; showing fallback only")


if __name__ == "__main__":
    main()
