"""Compare the numba and numpy implementations of the hot kernels.

Part 1 times each kernel in-process at a few sizes and checks the two
backends agree.  Part 2 times a short end-to-end run in two subprocesses,
one with NSAC_DISABLE_NUMBA=1.

    python3 benchmarks/bench_kernels.py [--repeat 200] [--no-e2e]
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from nsac._kernels import HAVE_NUMBA, numba_kernels, numpy_kernels


def make_args(name, n, rng):
    if name == "tridiag_solve":
        lower = -rng.random(n + 1)
        upper = -rng.random(n + 1)
        diag = 2.5 + rng.random(n + 1)
        return lower, diag, upper, rng.standard_normal(n + 1)
    if name in ("cubic_interp", "quintic_interp"):
        values = np.sin(np.linspace(0.0, 3.0, n + 1))
        return values, n, rng.random(n + 1)
    if name == "fv_update":
        w = np.full(n + 1, 1.0 / n)
        w[0] = w[-1] = 0.5 / n
        return 1.0 + 0.1 * rng.random(n + 1), 0.1 * rng.standard_normal(n), rng.random(n), w, 1e-4
    raise KeyError(name)


def bench_kernels(sizes, repeat):
    rng = np.random.default_rng(0)
    print(f"{'kernel':<15}{'n':>7}{'numpy us':>12}{'numba us':>12}{'speedup':>9}{'max |diff|':>13}")
    for name, f_np in numpy_kernels.items():
        f_nb = numba_kernels.get(name)
        for n in sizes:
            args = make_args(name, n, rng)
            t_np = min(timeit.repeat(lambda: f_np(*args), number=repeat, repeat=3)) / repeat
            if f_nb is None:
                print(f"{name:<15}{n:>7}{t_np * 1e6:>12.2f}{'-':>12}{'-':>9}{'-':>13}")
                continue
            f_nb(*args)  # compile outside the timing
            t_nb = min(timeit.repeat(lambda: f_nb(*args), number=repeat, repeat=3)) / repeat
            diff = float(np.max(np.abs(f_np(*args) - f_nb(*args))))
            print(f"{name:<15}{n:>7}{t_np * 1e6:>12.2f}{t_nb * 1e6:>12.2f}{t_np / t_nb:>9.1f}{diff:>13.2e}")


E2E = """
import time
from nsac.config import RunConfig
from nsac import solver
from nsac._kernels import BACKEND
cfg = RunConfig(T=0.01)
solver.run(RunConfig(T=2e-4), keep_snapshots=False)  # warm caches
t0 = time.perf_counter()
res = solver.run(cfg, keep_snapshots=False)
print(BACKEND, time.perf_counter() - t0, res.records[-1].energy)
"""


def bench_end_to_end():
    print("\nend-to-end, smooth profile, 100 steps:")
    for disable in ("0", "1"):
        env = dict(os.environ, NSAC_DISABLE_NUMBA=disable)
        out = subprocess.run([sys.executable, "-c", E2E], env=env, capture_output=True, text=True, check=True)
        backend, secs, energy = out.stdout.split()
        print(f"  {backend:<6} {float(secs):8.3f} s   final energy {energy}")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=200)
    p.add_argument("--sizes", type=int, nargs="+", default=[128, 512, 4096])
    p.add_argument("--no-e2e", action="store_true")
    args = p.parse_args()
    if not HAVE_NUMBA:
        print("numba unavailable (or disabled); timing the numpy path only")
    bench_kernels(args.sizes, args.repeat)
    if not args.no_e2e:
        bench_end_to_end()


if __name__ == "__main__":
    main()
