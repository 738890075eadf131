"""Compare the numba and numpy backends of the recurrence kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Both backends are called explicitly, so LAGUERRE_RIESZ_BACKEND does not
matter here.  Numba timings exclude the first (compiling) call.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from laguerre_riesz import _accel

CASES = [
    ("phi_last n=2048 m=1e5", lambda b, u: _accel.phi_last(2048, 0.5, u, backend=b), 100_000),
    ("phi_table n=512 m=2e4", lambda b, u: _accel.phi_table(512, 0.5, u, backend=b), 20_000),
    ("christoffel order=512 m=512", lambda b, u: _accel.christoffel(512, 0.5, u, backend=b), 512),
    ("pair n=1024 m=1e5", lambda b, u: _accel.pair(1024, 0.0, u, backend=b), 100_000),
]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA else [])
    print(f"{'case':32s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    rng = np.random.default_rng(0)
    for name, fn, m in CASES:
        u = np.sort(rng.uniform(0.0, 50.0, m))
        row = {}
        for b in backends:
            fn(b, u[:8])  # warm up / compile
            row[b] = best_of(lambda: fn(b, u), args.repeat)
        line = f"{name:32s}" + "".join(f"{row[b]:11.4f}s" for b in backends)
        if len(backends) > 1:
            line += f"{row['numpy'] / row['numba']:11.1f}x"
        print(line)
        if len(backends) > 1:
            a, c = fn("numpy", u), fn("numba", u)
            a = a[0] if isinstance(a, tuple) else a
            c = c[0] if isinstance(c, tuple) else c
            print(f"{'':32s}max |numpy - numba| = {np.max(np.abs(np.asarray(a) - np.asarray(c))):.2e}")


if __name__ == "__main__":
    main()
