"""Throughput of the compiled SDE stepper against the numpy fallback.

Both backends run the same paths (same Philox stream), so the benchmark also
checks that their exit statistics coincide.

    python benchmarks/bench_sde.py --paths 20000 --repeat 3
"""
import argparse
import time

import numpy as np

from gluedbessel import stochastic as sto


def bench(backend, cfg, x0, repeat):
    best, ens = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        ens = sto.simulate(cfg, x0, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, ens


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--paths", type=int, default=20_000)
    p.add_argument("--d", type=float, default=3.0)
    p.add_argument("--x0", type=float, default=2.0)
    p.add_argument("--boundary", default="glue", choices=sorted(sto.BOUNDARIES))
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=1)
    a = p.parse_args(argv)

    cfg = sto.ProcessConfig(d=a.d, n_paths=a.paths, seed=a.seed, boundary=a.boundary)
    backends = ["numpy"] + (["cython"] if sto.BACKEND == "cython" else [])
    results = {}
    for b in backends:
        sec, ens = bench(b, cfg, a.x0, a.repeat)
        steps = int(ens.steps.sum())
        results[b] = (sec, ens)
        print(f"{b:>7s}: {sec:8.3f} s  {a.paths / sec:12.0f} paths/s  {steps / sec / 1e6:8.2f} Msteps/s")
    if len(results) == 2:
        (tn, en), (tc, ec) = results["numpy"], results["cython"]
        same = np.array_equal(en.status, ec.status) and np.array_equal(en.side, ec.side)
        print(f"speedup: {tn / tc:.1f}x  identical outcomes: {same}")
    else:
        print("compiled extension not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
