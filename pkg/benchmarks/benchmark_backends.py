"""Compare the numba and numpy kernel backends.

Two workloads:
  * trajectory integration (many tiny probe batches inside the RK4
    loop) -- the case the numba backend exists for;
  * one large batched kernel evaluation -- where vectorized numpy is
    already competitive.

Run:  python benchmarks/benchmark_backends.py [--steps N] [--batch N]
"""
import argparse
import time

import numpy as np

from avcalc.dynamics import integrate_trajectory
from avcalc.exprlang import parse
from avcalc.kernels import compile_field, eval_batch
from avcalc.systems import charged_particle


def time_trajectory(backend: str, steps: int) -> float:
    system = charged_particle(b=1.0)
    lam = system.lagrangian
    lam.engine("0", backend)  # compile outside the timed region
    x0, v0 = [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]
    t0 = time.perf_counter()
    integrate_trajectory(lam, x0, v0, 0.0, 1.0, steps, backend=backend)
    return time.perf_counter() - t0


def time_batch(backend: str, batch: int, repeats: int = 20) -> float:
    ast = parse("sin(x1)*cos(x2) + exp(-x1^2)*v1*v2 + 0.5*(v1^2+v2^2)")
    names = ["x1", "x2", "v1", "v2"]
    kernel = compile_field(ast, names, backend)
    rng = np.random.default_rng(7)
    vals = rng.uniform(-1, 1, (batch, 4))
    d1 = rng.uniform(-1, 1, (batch, 4))
    d2 = rng.uniform(-1, 1, (batch, 4))
    eval_batch(kernel, vals, d1, d2)  # warm up (JIT / allocation)
    t0 = time.perf_counter()
    for _ in range(repeats):
        eval_batch(kernel, vals, d1, d2)
    return (time.perf_counter() - t0) / repeats


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=20000, help="RK4 steps for the trajectory run")
    ap.add_argument("--batch", type=int, default=200000, help="probes for the batched run")
    args = ap.parse_args()

    print(f"trajectory integration, charged particle, {args.steps} RK4 steps:")
    times = {}
    for backend in ("numba", "numpy"):
        times[backend] = time_trajectory(backend, args.steps)
        print(f"  {backend:>6}: {times[backend]:8.3f} s")
    print(f"  speedup numba vs numpy: {times['numpy'] / times['numba']:.2f}x")

    print(f"\nbatched kernel evaluation, {args.batch} probes:")
    times = {}
    for backend in ("numba", "numpy"):
        times[backend] = time_batch(backend, args.batch)
        print(f"  {backend:>6}: {1e3 * times[backend]:8.3f} ms/eval")
    print(f"  speedup numba vs numpy: {times['numpy'] / times['numba']:.2f}x")


if __name__ == "__main__":
    main()
