"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Also checks that both backends return bit-identical results.
"""
import argparse
import statistics
import time

import numpy as np

from rdsthermo import _pykernels

try:
    from rdsthermo import _ckernels
except ImportError:
    _ckernels = None


def timeit(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), out


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return a.dtype == b.dtype and np.array_equal(a, b)
    return a == b


def cases():
    rng = np.random.default_rng(0)
    golden = np.array([[1, 1], [1, 0]], dtype=np.uint8)
    trans = np.stack([np.ones((2, 2), np.uint8), golden] * 12)[:23]
    allowed = np.ones(2, dtype=bool)
    words = _pykernels.admissible_words(np.ones((15, 2, 2), np.uint8), allowed)
    mats = np.broadcast_to(np.array([np.diag([2.0, 1.0]), np.diag([1.0, 3.0])]), (16, 2, 2, 2)).copy()
    x = rng.normal(size=4_000_000)
    w = rng.normal(size=18)
    conf = np.zeros(18, dtype=np.uint64)
    for i in range(17):
        conf[i] |= np.uint64(1 << (i + 1))
        conf[i + 1] |= np.uint64(1 << i)
    return [
        ("admissible_words (S2, L=24)", "admissible_words", (trans, allowed)),
        ("prefix_products (2^16 words, q=2)", "prefix_products", (words, mats)),
        ("neumaier_tree_sum (4e6, 1 thread)", "neumaier_tree_sum", (x, 1)),
        ("neumaier_tree_sum (4e6, 4 threads)", "neumaier_tree_sum", (x, 4)),
        ("max_weight_subset (n=18)", "max_weight_subset", (w, conf)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled backend not built; only the python backend is available")
    print(f"{'kernel':<38}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}  identical")
    for label, name, argv in cases():
        tp, op = timeit(lambda: getattr(_pykernels, name)(*argv), args.repeat)
        if _ckernels is None:
            print(f"{label:<38}{tp:>12.4f}{'-':>12}{'-':>10}  -")
            continue
        tc, oc = timeit(lambda: getattr(_ckernels, name)(*argv), args.repeat)
        print(f"{label:<38}{tp:>12.4f}{tc:>12.4f}{tp / tc:>9.1f}x  {same(op, oc)}")


if __name__ == "__main__":
    main()
