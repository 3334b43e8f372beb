"""Time the compiled and pure-Python kernels on the same inputs.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one row per kernel with the median time of each backend and the speedup.
"""

import argparse
import statistics
import time

import numpy as np

from leafwise import kernels


def _time(fn, repeat):
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return statistics.median(out)


def cases(n1, n2):
    rng = np.random.default_rng(0)
    u1 = 1.0 + 0.1 * rng.random(n1)
    c1 = [np.full(n1, v) for v in (-3.5, 3.5, 1.0, 1.0)]
    u2 = 1.0 + 0.1 * rng.random(n2 * n2)
    c2 = [np.full(n2 * n2, v) for v in (-3.5, 3.5, 1.0, 1.0)]
    h2 = (2 * np.pi / n1) ** -2
    k2 = (2 * np.pi / n2) ** -2
    return {
        "reaction": lambda m: (lambda: [m.reaction(u1, *c1) for _ in range(200)]),
        "reaction_du": lambda m: (lambda: [m.reaction_du(u1, *c1) for _ in range(200)]),
        "rhs_1d": lambda m: (lambda: [m.rhs_1d(u1, *c1, h2) for _ in range(200)]),
        "rhs_2d": lambda m: (lambda: [m.rhs_2d(u2, *c2, n2, n2, k2, k2) for _ in range(20)]),
        "ode_dopri": lambda m: (lambda: m.ode_dopri(-3.5, 3.5, 1.0, 1.0, 0.9, 50.0, 1e-10,
                                                    1e-12, None, 1e-8, 1e6, 1_000_000)),
        "ode_dopri_dense": lambda m: (lambda: m.ode_dopri(-3.5, 3.5, 1.0, 1.0, 0.9, 50.0,
                                                          1e-10, 1e-12,
                                                          np.linspace(0, 50, 5001), 1e-8,
                                                          1e6, 1_000_000)),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n1", type=int, default=4096)
    ap.add_argument("--n2", type=int, default=256)
    args = ap.parse_args(argv)
    py = kernels.backend_module("python")
    try:
        cy = kernels.backend_module("cython")
    except ImportError:
        cy = None
        print("compiled extension not built; timing the Python backend only")
    print(f"active backend: {kernels.BACKEND}")
    print(f"{'kernel':<18}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for name, make in cases(args.n1, args.n2).items():
        tp = _time(make(py), args.repeat) * 1e3
        if cy is None:
            print(f"{name:<18}{tp:>14.3f}{'-':>14}{'-':>10}")
            continue
        tc = _time(make(cy), args.repeat) * 1e3
        print(f"{name:<18}{tp:>14.3f}{tc:>14.3f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
