"""Time the compiled kernels against the numpy fallback on the same inputs.

    python benchmarks/bench_kernels.py [--scale 1.0] [--repeat 3]

Each row reports the best wall time per backend, the speedup and whether
the two backends produced identical (orbits, maps) or agreeing (sums)
results.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from ergolab import Rotation, StepObservable, TrigPolynomial, step_skew
from ergolab import _kernels
from ergolab.double_avg import default_points
from ergolab.torus import lattice_grid_array


def best_time(call, repeat: int):
    best, result = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = call()
        best = min(best, time.perf_counter() - t0)
    return best, result


def cases(scale: float):
    m = step_skew(["sqrt(2)-1"], ["1/3"])
    R2 = Rotation(["sqrt(2)-1", "sqrt(3)-1"])
    box = StepObservable.indicator((0, 0), (0.5, 0.5))
    smooth = TrigPolynomial(2, {(1, 0): 0.5, (-1, 0): 0.5, (2, -1): 0.25j, (-2, 1): -0.25j})
    mixed = smooth * box + TrigPolynomial.cos((0, 3))
    f1 = TrigPolynomial(1, {(2,): 1.0, (1,): 0.5j})
    f2 = TrigPolynomial(1, {(-1,): 1.0, (1,): 0.25})
    n_orbit = int(1_000_000 * scale)
    n_scan = int(20_000 * scale)
    pts = np.random.default_rng(0).random((int(200_000 * scale), 2))
    seeds = lattice_grid_array(2, 8)
    dpts = default_points(1)[:20]
    counts = np.zeros(1, dtype=np.int64)
    return [
        (f"orbit, step skew, n={n_orbit}", True,
         lambda b: _kernels.orbit_points(m.pack(), np.array([0.1, 0.2]), 0, counts, n_orbit, backend=b)[0]),
        (f"map, step skew, {pts.shape[0]} points", True,
         lambda b: _kernels.map_points(m.pack(), pts, backend=b)),
        (f"evaluate mixed observable, {pts.shape[0]} points", False,
         lambda b: _kernels.eval_points(mixed.pack(), pts, backend=b)),
        (f"scan, T^2 indicator, 64 seeds x {n_scan}", False,
         lambda b: _kernels.birkhoff_sums(R2.pack(), box.pack(), seeds, [n_scan], backend=b)),
        (f"double average, 20 points x {n_scan}", False,
         lambda b: _kernels.double_sums(Rotation(["sqrt(2)-1"]).pack().alpha, f1.pack(), f2.pack(), dpts,
                                        [n_scan], backend=b)),
    ]


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--scale", type=float, default=1.0, help="multiply every problem size")
    parser.add_argument("--repeat", type=int, default=3, help="timings per case; the best is kept")
    args = parser.parse_args(argv)
    if "compiled" not in _kernels.BACKENDS:
        raise SystemExit("compiled kernels are not built; reinstall with Cython and a C compiler")
    print(f"{'case':<44} {'python s':>10} {'compiled s':>11} {'speedup':>8}  agreement")
    for name, exact, call in cases(args.scale):
        tp, a = best_time(lambda: call("python"), args.repeat)
        tc, b = best_time(lambda: call("compiled"), args.repeat)
        if exact:
            agree = "identical" if np.array_equal(a, b) else "DIFFERENT"
        else:
            agree = f"max diff {np.max(np.abs(np.asarray(a) - np.asarray(b))):.1e}"
        print(f"{name:<44} {tp:>10.3f} {tc:>11.3f} {tp / tc:>7.1f}x  {agree}")


if __name__ == "__main__":
    main()
