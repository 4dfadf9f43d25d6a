"""Time the compiled hot kernels against the NumPy fallback.

Usage: python benchmarks/bench_core.py [--repeat N]
"""
import argparse
import time

import numpy as np

from dualkernel import _accel
from dualkernel.circuit import FeatureMapConfig
from dualkernel.tensornet import block_states


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    S = block_states(rng.random((128, 64)), FeatureMapConfig(64))
    X = rng.normal(size=(400, 8))
    K = np.exp(-0.2 * ((X[:, None] - X[None]) ** 2).sum(-1))
    y = np.where(X[:, 0] + 0.3 * rng.normal(size=400) > 0, 1.0, -1.0)
    return {
        "overlap_tile 128x128, 32 blocks": lambda impl: impl.overlap_tile(S, S),
        "smo m=400, C=10": lambda impl: impl.smo(K, y, 10.0, 1e-3, 10**7),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    impls = _accel.implementations()
    if "compiled" not in impls:
        print("compiled core not built; timing the fallback only")
    print(f"{'case':34s}" + "".join(f"{name:>12s}" for name in impls) + "     speedup")
    for label, fn in cases(np.random.default_rng(0)).items():
        t = {name: best_of(lambda: fn(impl), args.repeat) for name, impl in impls.items()}
        speed = f"{t['python'] / t['compiled']:10.1f}x" if "compiled" in t else ""
        print(f"{label:34s}" + "".join(f"{v * 1e3:10.2f}ms" for v in t.values()) + speed)


if __name__ == "__main__":
    main()
