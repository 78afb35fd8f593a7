"""Time the compiled hot-loop kernels against the pure numpy fallback.

Usage: python benchmarks/bench_kernels.py [--steps N] [--repeat R]
"""

import argparse
import timeit

import numpy as np

from kappakepler._core import available_backends, kernels_for


def workloads(steps):
    q = np.array([1.0, 0.0, 0.0])
    p = np.array([0.0, 1.0, 0.0])
    u = np.array([1.0, 0.0, 0.0, 0.0])
    v = np.array([0.0, 1.0, 0.0, 0.0])
    x = np.array([0.0, 1.0, 0.0, 0.0])
    y = np.array([-1.0, 0.0, 0.0, 0.0])
    dt = 1e-3
    return [
        ("kepler_verlet", lambda k: k.kepler_verlet(q, p, 1.0, 1.0, dt, steps)),
        ("kepler_rk4", lambda k: k.kepler_rk4(q, p, 1.0, 1.0, dt, steps)),
        ("sphere_midpoint", lambda k: k.sphere_midpoint(u, v, dt, steps)),
        ("delaunay_rk4", lambda k: k.delaunay_rk4(x, y, 1.0, dt, steps)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=20000,
                    help="integration steps per timed call")
    ap.add_argument("--repeat", type=int, default=5,
                    help="timing repetitions (best is reported)")
    args = ap.parse_args(argv)

    backends = available_backends()
    print(f"backends: {', '.join(backends)}  steps: {args.steps}")
    header = f"{'kernel':<18}" + "".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for name, call in workloads(args.steps):
        times = []
        for backend in backends:
            kern = kernels_for(backend)
            best = min(timeit.repeat(lambda: call(kern), number=1,
                                     repeat=args.repeat))
            times.append(best)
        row = f"{name:<18}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[1] / times[0]:>9.1f}x"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
