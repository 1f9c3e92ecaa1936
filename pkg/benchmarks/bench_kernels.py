"""Time the numba and numpy kernel paths against each other.

    python benchmarks/bench_kernels.py [--sizes 64 128 256] [--repeat 5]

Kernel timings call both backends directly.  The whole-step timing runs a
short simulation in a subprocess per backend, selected with CHEMOLOG_BACKEND.
"""

import argparse
import json
import os
import statistics
import subprocess
import sys
import time

import numpy as np

from chemolog import kernels

STEP_SNIPPET = """
import json, time
from chemolog import kernels
from chemolog.coefficients import ModelParams, parse_spec
from chemolog.elliptic import solve_helmholtz
from chemolog.grid import Grid
from chemolog.simulator import SolverConfig, State, initial_condition, step
g = Grid({n}, {n})
p = ModelParams(0, 1.0, 1.0, 0.5, parse_spec("exp_decay(1.0)"), parse_spec("constant(1.0)"))
u = initial_condition("random_smooth", g, mass=20.0, modes=3, seed=7)
s = State(0.0, u, solve_helmholtz(u, g))
s = step(s, p, SolverConfig(), g)  # compile / warm up
t0 = time.perf_counter()
for _ in range({steps}):
    s = step(s, p, SolverConfig(), g)
print(json.dumps(dict(backend=kernels.BACKEND, per_step=(time.perf_counter() - t0) / {steps})))
"""


def timeit(fn, repeat):
    fn()  # warm-up (numba compiles on first call)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def kernel_cases(n, rng):
    x = rng.uniform(0, 5, (n, n))
    kx = np.zeros((n, n + 1))
    ky = np.zeros((n + 1, n))
    kx[:, 1:-1] = 1.0
    ky[1:-1, :] = 1.0
    h = 1.0 / n
    v = rng.uniform(0, 2, (n, n))
    zero = np.zeros_like(x)
    return {
        "apply_operator": lambda b: b.apply_operator(x, 1.0, kx, ky, h, h),
        "cg_helmholtz": lambda b: b.cg(x, zero, 1.0, kx, ky, h, h, 1e-10, 10 * 2 * n, False),
        "upwind_flux": lambda b: b.upwind_flux(x, v, kx, ky, 0.5, h, h),
    }


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--steps", type=int, default=20)
    args = ap.parse_args(argv)

    backends = {"numba": kernels.get_backend("numba"), "numpy": kernels.get_backend("numpy")}
    rng = np.random.default_rng(0)
    print(f"{'kernel':<16}{'n':>6}{'numba [ms]':>14}{'numpy [ms]':>14}{'speed-up':>10}")
    for n in args.sizes:
        for name, case in kernel_cases(n, rng).items():
            t = {b: timeit(lambda: case(mod), args.repeat) for b, mod in backends.items()}
            print(f"{name:<16}{n:>6}{1e3 * t['numba']:>14.3f}{1e3 * t['numpy']:>14.3f}"
                  f"{t['numpy'] / t['numba']:>10.2f}")

    for n in args.sizes:
        per = {}
        for b in backends:
            env = dict(os.environ, CHEMOLOG_BACKEND=b)
            res = subprocess.run([sys.executable, "-c", STEP_SNIPPET.format(n=n, steps=args.steps)],
                                 env=env, capture_output=True, text=True, check=True)
            per[b] = json.loads(res.stdout)["per_step"]
        print(f"{'full step':<16}{n:>6}{1e3 * per['numba']:>14.3f}{1e3 * per['numpy']:>14.3f}"
              f"{per['numpy'] / per['numba']:>10.2f}")


if __name__ == "__main__":
    main()
