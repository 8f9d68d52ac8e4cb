"""Compare the compiled and pure-Python kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--seed S]
Prints one CSV row per (kernel, backend) with the median wall time and the
speedup over the Python backend.
"""

import argparse
import statistics
import time

import numpy as np

from phicov.counting import make_family
from phicov.instance import random_instance
from phicov.kernels import available_backends


def _time(fn, repeat):
    runs = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        runs.append(time.perf_counter() - t0)
    return statistics.median(runs)


def cases(seed):
    rng = np.random.default_rng(seed)
    phi = make_family("pav")
    inst = random_instance(400, 60, 0.3, (0.5, 2.0), seed=seed)
    indptr, indices = inst.csr
    table = phi.table(inst.m)
    w = inst.weight_array
    x = rng.random(inst.m)
    mask = (rng.random(inst.m) < 0.3).astype(np.uint8)
    probs = rng.random(64)
    xs = rng.uniform(0.1, 60.0, 200)
    vals, tail = phi.array, phi.tail_slope
    return {
        "pb_convolve[d=64]": lambda k: k.pb_convolve(probs),
        "multilinear[n=400,m=60]": lambda k: k.multilinear(indptr, indices, x, w, table),
        "coverage_value[n=400,m=60]": lambda k: k.coverage_value(indptr, indices, mask, w, table),
        "poisson_expectation[200 x]": lambda k: [k.poisson_expectation(vals, tail, float(t), 1e-12) for t in xs],
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=7)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    backends = available_backends()
    print("kernel,backend,median_s,speedup")
    for name, call in cases(args.seed).items():
        base = None
        for bname, mod in sorted(backends.items(), key=lambda kv: kv[0] != "python"):
            t = _time(lambda: call(mod), args.repeat)
            base = base or t
            print(f"{name},{bname},{t:.6f},{base / t:.1f}")
    if "cython" not in backends:
        print("# compiled backend not built; only the Python fallback was timed")


if __name__ == "__main__":
    main()
