"""Compare the numba kernels with the pure-numpy fallback.

Each backend runs in its own interpreter because the backend is chosen at
import time from ``RIESZCONE_DISABLE_NUMBA``. Times exclude the first call
(JIT compilation)::

    python3 benchmarks/bench_kernels.py [--n 100000] [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from rieszcone import HAVE_NUMBA, build_algebra, chain, Poset, sample_riesz
from rieszcone.triangular import cholesky_batch

n, repeat = int(sys.argv[1]), int(sys.argv[2])
cones = {
    "P4": Poset(["1", "2", "3", "4"], [("1", "3"), ("1", "4"), ("2", "3")]),
    "chain6": chain(6),
}
out = {"numba": HAVE_NUMBA}
for name, p in cones.items():
    alg = build_algebra(p)
    rng = np.random.default_rng(0)
    A = rng.standard_normal((n, alg.dim))
    B = rng.standard_normal((n, alg.dim))
    T = np.zeros((n, alg.dim))
    T[:, : alg.dim_H] = rng.standard_normal((n, alg.dim_H))
    T[:, : alg.n] = np.abs(T[:, : alg.n]) + 0.5
    X = alg.gram(T)
    chi = [len(p) + 1.0] * len(p)
    jobs = {
        "mul": lambda: alg.mul(A, B),
        "cholesky": lambda: cholesky_batch(alg, X),
        "sample": lambda: sample_riesz(alg, chi, None, n, 1),
    }
    for job, fn in jobs.items():
        fn()
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t0)
        out[f"{name}.{job}"] = best
print(json.dumps(out))
"""


def run_backend(disable: bool, n: int, repeat: int) -> dict:
    env = dict(os.environ, RIESZCONE_DISABLE_NUMBA="1" if disable else "0")
    res = subprocess.run(
        [sys.executable, "-c", WORKER, str(n), str(repeat)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(res.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100_000, help="batch size")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    fast = run_backend(False, args.n, args.repeat)
    slow = run_backend(True, args.n, args.repeat)
    if not fast.pop("numba"):
        print("numba is not available; both columns use numpy")
    slow.pop("numba")
    print(f"{'kernel':<20}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for key in fast:
        print(f"{key:<20}{fast[key]:>12.4f}{slow[key]:>12.4f}{slow[key] / fast[key]:>10.1f}")


if __name__ == "__main__":
    main()
