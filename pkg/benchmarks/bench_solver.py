#!/usr/bin/env python3
"""Benchmark the compiled SMO core against the pure-NumPy fallback.

Runs the same training problems through both backends, checks that they
agree, and reports wall time and speedup. Usage:

    python3 benchmarks/bench_solver.py [--sizes 200,500,1000] [--dim 64]
"""

import argparse
import time

import numpy as np

from face2bmi import solver
from face2bmi.kernels import KernelKind, KernelSpec, kernel_cache
from face2bmi.smo_python import dual_objective


def make_problem(n: int, dim: int, seed: int):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, dim))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    w = rng.normal(size=dim)
    w *= 20.0 / np.linalg.norm(w)
    y = 28.0 + X @ w + 0.5 * rng.normal(size=n)
    return X, y


def run(backend: str, cache, y, c, eps, tol) -> tuple[float, float, int]:
    start = time.perf_counter()
    res = solver.solve(cache, y, c, eps, tol, max_iter=200 * len(y), backend=backend)
    elapsed = time.perf_counter() - start
    if not res.converged:
        raise RuntimeError(f"{backend} backend did not converge (gap {res.kkt_gap:.2e})")
    obj = dual_objective(cache.matrix, y, eps, res.alpha, res.alpha_star)
    return elapsed, obj, res.iterations


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="200,500,1000")
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    if not solver.compiled_available():
        print("compiled core not built; nothing to compare")
        return 1

    sizes = [int(s) for s in args.sizes.split(",")]
    c, eps, tol = 10.0, 0.25, 1e-3
    print(f"{'n':>6} {'iters':>8} {'python':>10} {'compiled':>10} {'speedup':>8}")
    print("-" * 46)
    for n in sizes:
        X, y = make_problem(n, args.dim, seed=n)
        cache = kernel_cache(KernelSpec(KernelKind.RBF, gamma=1.5), X)
        t_py = min(run("python", cache, y, c, eps, tol)[0] for _ in range(args.repeats))
        t_cy, obj_cy, iters = min(
            (run("compiled", cache, y, c, eps, tol) for _ in range(args.repeats)),
            key=lambda r: r[0],
        )
        _, obj_py, _ = run("python", cache, y, c, eps, tol)
        rel_gap = abs(obj_py - obj_cy) / max(1.0, abs(obj_py))
        assert rel_gap < 1e-9, f"backends disagree: {rel_gap:.2e}"
        print(f"{n:>6} {iters:>8} {t_py:>9.3f}s {t_cy:>9.3f}s {t_py / t_cy:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
