"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--rows 200000]

Both backends are loaded side by side, so no environment toggling is needed.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from taylorlp.kernels import get_backend


def cases(n_rows: int, n_groups: int, p: int):
    rng = np.random.default_rng(0)
    codes = np.sort(rng.integers(0, n_groups, n_rows)).astype(np.int64)
    years = np.concatenate([np.arange(np.sum(codes == g)) for g in range(n_groups)]).astype(np.int64) + 2000
    values = np.ascontiguousarray(rng.standard_normal((n_rows, p)))
    state = np.array([1, 2, 3, 4], dtype=np.uint64)
    return {
        "group_demean": lambda k: k.group_demean(values, codes, n_groups),
        "cluster_score_sums": lambda k: k.cluster_score_sums(values, codes, n_groups),
        "shift_index": lambda k: k.shift_index(codes, years, 1),
        "xoshiro_normal(1e5)": lambda k: k.xoshiro_normal(state.copy(), 100_000),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--rows", type=int, default=200_000)
    ap.add_argument("--groups", type=int, default=500)
    ap.add_argument("--cols", type=int, default=8)
    args = ap.parse_args(argv)

    backends = {}
    for name in ("cython", "python"):
        try:
            backends[name] = get_backend(name)
        except ImportError:
            print(f"{name}: unavailable")
    print(f"rows={args.rows} groups={args.groups} cols={args.cols} best of {args.repeat}")
    print(f"{'kernel':<22}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for label, fn in cases(args.rows, args.groups, args.cols).items():
        times = {b: min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat)) for b, k in backends.items()}
        row = f"{label:<22}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times.values())
        if len(times) == 2:
            row += f"{times['python'] / times['cython']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
