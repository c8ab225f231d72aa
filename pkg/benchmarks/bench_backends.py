#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times one full fit/sampling workload per engine under both backends and
checks that they produce identical assignments. The numba timings exclude
JIT compilation (one warmup call per kernel).

Usage: python benchmarks/bench_backends.py [--n 600] [--sweeps 200]
"""

import argparse
import time

import numpy as np

from crpmap import DpMeansConfig, GibbsConfig, MapDpConfig, NGPrior
from crpmap import _kernels, fit_dpmeans, fit_mapdp, run_gibbs
from crpmap.crp import CrpConfig, GeneratorConfig, generate_dataset


def make_problem(n, dim, seed=0):
    prior = NGPrior(m0=np.ones(dim), c0=0.1, b0=10.0 * np.ones(dim), a0=1.0)
    cfg = GeneratorConfig(crp=CrpConfig(alpha=3.0, N=n), prior=prior, D=dim,
                          seed=seed)
    ds, truth, _ = generate_dataset(cfg)
    return ds, prior


def timed(fn, repeats=3):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_mapdp(ds, prior, backends):
    results = {}
    for backend in backends:
        def run():
            return fit_mapdp(ds, MapDpConfig(alpha=3.0, prior=prior, seed=1,
                                             restarts=4), backend=backend)
        if backend == "numba":
            run()  # JIT warmup
        results[backend] = timed(run)
    return results


def bench_gibbs(ds, prior, sweeps, backends):
    results = {}
    for backend in backends:
        def run():
            return run_gibbs(ds, GibbsConfig(alpha=3.0, prior=prior,
                                             max_iters=sweeps, seed=1),
                             backend=backend)
        if backend == "numba":
            run()
        results[backend] = timed(run, repeats=1)
    return results


def bench_dpmeans(ds, backends):
    results = {}
    for backend in backends:
        def run():
            return fit_dpmeans(ds, DpMeansConfig(lam=25.0), backend=backend)
        if backend == "numba":
            run()
        results[backend] = timed(run)
    return results


def report(name, results):
    t_np = results["numpy"][0]
    line = f"{name:<10}  numpy {t_np * 1e3:9.1f} ms"
    if "numba" in results:
        t_nb = results["numba"][0]
        line += f"   numba {t_nb * 1e3:9.1f} ms   speedup {t_np / t_nb:6.1f}x"
    print(line)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=600)
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--sweeps", type=int, default=200,
                    help="gibbs iterations for the sampling benchmark")
    args = ap.parse_args()

    backends = ["numpy"]
    if _kernels.HAVE_NUMBA:
        backends.append("numba")
    else:
        print("numba unavailable or disabled (CRPMAP_NUMBA=0): timing numpy only")

    ds, prior = make_problem(args.n, args.dim)
    print(f"CRP-mixture problem: N={args.n}, D={args.dim}")

    m = bench_mapdp(ds, prior, backends)
    report("mapdp", m)
    g = bench_gibbs(ds, prior, args.sweeps, backends)
    report(f"gibbs x{args.sweeps}", g)
    d = bench_dpmeans(ds, backends)
    report("dpmeans", d)

    if "numba" in backends:
        fit_np = m["numpy"][1]
        fit_nb = m["numba"][1]
        same = bool(np.array_equal(fit_np.partition.z, fit_nb.partition.z))
        g_same = all(np.array_equal(a.z, b.z) for a, b in
                     zip(g["numpy"][1].samples, g["numba"][1].samples))
        print(f"identical mapdp assignments across backends: {same}")
        print(f"identical gibbs sample paths across backends: {g_same}")


if __name__ == "__main__":
    main()
