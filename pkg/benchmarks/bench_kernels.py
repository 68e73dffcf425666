"""Time the numba kernels against the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N] [--json out.json]

Both backend modules are imported directly, so the EPSM_DISABLE_NUMBA flag
does not matter here. The first numba call (JIT compile or cache load) is
excluded from the timings, and outputs are checked against each other
before timing.
"""
import argparse
import json
import math
import platform
import sys
import timeit

import numpy as np

from epsm.kernels import _numba, _numpy


def rect(cx, cy, h, length, width):
    c, s = math.cos(h), math.sin(h)
    pts = [(length / 2, width / 2), (-length / 2, width / 2), (-length / 2, -width / 2), (length / 2, -width / 2)]
    return np.array([(cx + c * x - s * y, cy + s * x + c * y) for x, y in pts])


def cases(rng):
    n = 100_000
    dp = rng.uniform(-80, 80, (n, 2))
    dv = rng.uniform(-25, 25, (n, 2))
    r = rng.uniform(0.5, 4.0, n)
    t = np.linspace(0, 200, 401)
    poly = np.column_stack((t, 5 * np.sin(t / 20)))
    pts = rng.uniform((0, -10), (200, 10), (20_000, 2))
    a = np.column_stack((np.linspace(0, 50, 2_000), rng.normal(0, 0.05, 2_000)))
    b = np.column_stack((np.linspace(0, 50, 2_000), np.zeros(2_000)))
    boxes = [(rect(0, 0, rng.uniform(-3, 3), 4.5, 1.9), rect(*rng.uniform(-2, 2, 2), rng.uniform(-3, 3), 4.5, 1.9))
             for _ in range(2_000)]

    def areas(mod):
        return lambda: [mod.convex_intersection_area(p, q) for p, q in boxes]

    return {
        "encounter_batch (100k pairs)": lambda mod: (lambda: mod.encounter_batch(dp, dv, r)),
        "project_to_polyline (20k pts x 400 seg)": lambda mod: (lambda: mod.project_to_polyline(pts, poly)),
        "nearest_distance (2k x 2k)": lambda mod: (lambda: mod.nearest_distance(a, b)),
        "convex_intersection_area (2k pairs)": areas,
    }


def same(x, y):
    if isinstance(x, tuple):
        return all(same(u, v) for u, v in zip(x, y))
    return np.allclose(np.asarray(x, float), np.asarray(y, float), rtol=1e-12, atol=1e-12, equal_nan=True)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write results as JSON")
    args = ap.parse_args(argv)

    results = []
    for name, make in cases(np.random.default_rng(0)).items():
        fn_np, fn_nb = make(_numpy), make(_numba)
        if not same(fn_np(), fn_nb()):  # also warms up the JIT
            print(f"{name}: backends disagree", file=sys.stderr)
            return 1
        t_np = min(timeit.repeat(fn_np, number=1, repeat=args.repeat))
        t_nb = min(timeit.repeat(fn_nb, number=1, repeat=args.repeat))
        results.append({"kernel": name, "numpy_s": t_np, "numba_s": t_nb, "speedup": t_np / t_nb})

    print(f"{'kernel':<42}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>9}")
    for r in results:
        print(f"{r['kernel']:<42}{1e3 * r['numpy_s']:>12.2f}{1e3 * r['numba_s']:>12.2f}{r['speedup']:>8.1f}x")
    if args.json:
        meta = {"python": platform.python_version(), "numpy": np.__version__,
                "numba": __import__("numba").__version__, "machine": platform.machine()}
        with open(args.json, "w") as fh:
            json.dump({"meta": meta, "results": results}, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
