"""Time the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from mcidtest import _pycore
from mcidtest.kernels import MODE_EXPANSION

try:
    from mcidtest import _core
except ImportError:
    _core = None


def cases(rng):
    n = 32
    cum = np.ascontiguousarray(np.cumsum(np.full((n, n), 1.0 / n), axis=1))
    u = rng.random(200_000)
    w = rng.integers(0, n, size=200_000).astype(np.int64)
    local = np.full(n, -1, dtype=np.int64)
    local[:8] = np.arange(8)
    r = np.full(8, 2000, dtype=np.int64)
    A = rng.random((16, 16))
    W = np.triu(A, 1) + np.triu(A, 1).T
    d = W.sum(axis=1) + rng.random(16)
    return {
        "walk (2e5 steps, n=32)": lambda mod: mod.walk(cum, u, 0),
        "scan_samples (2e5 positions)": lambda mod: mod.scan_samples(w, local, r.copy(), 8),
        "enum_subsets (k=16)": lambda mod: mod.enum_subsets(W, d, 16, MODE_EXPANSION),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    backends = [("python", _pycore)] + ([("compiled", _core)] if _core is not None else [])
    print(f"{'kernel':32s}" + "".join(f"{name:>12s}" for name, _ in backends) + "     speedup")
    for label, fn in cases(rng).items():
        times = [min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)) for _, mod in backends]
        row = f"{label:32s}" + "".join(f"{t * 1e3:10.1f}ms" for t in times)
        if len(times) == 2:
            row += f"  {times[0] / times[1]:9.1f}x"
        print(row)
    if _core is None:
        print("compiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
