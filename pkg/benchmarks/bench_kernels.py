"""Time the compiled kernels against the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Each row reports the best-of-repeat wall time per backend and the speedup.
An end-to-end inexact M-IHS solve is timed under both backends as well; the
solver picks its backend at import, so that case switches via ``aab_solve``'s
``backend`` argument and the sketch kernels through ``apply_sketch``.
"""
import argparse
import json
import math
import sys
import timeit

import numpy as np

from mihs import _backend
from mihs.linalg import make_rng
from mihs.sketch import apply_sketch, build_sketch
from mihs.subsolver import BREAKDOWN_TOL


def best_time(fn, repeat):
    fn()  # warm up
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def cases(rng):
    n, d = 16384, 64
    M = np.ascontiguousarray(rng.standard_normal((n, d)))
    cs = build_sketch("countsketch", n, 512, 1)
    rows, vals = cs.payload
    osnap = build_sketch("osnap", n, 512, 2, s=4)
    orows, ovals = osnap.payload
    H = np.ascontiguousarray(rng.standard_normal((4096, 64)))
    A = np.ascontiguousarray(rng.standard_normal((400, 200)) * np.geomspace(1, 1e-3, 200))
    b = rng.standard_normal(200)

    yield "scatter_rows countsketch 16384x64 -> 512", "scatter_rows", (rows, vals, M, 512), None
    yield "scatter_rows osnap s=4 16384x64 -> 512", "scatter_rows", (orows, ovals, M, 512), None
    yield "fwht_rows 4096x64", "fwht_rows", (H,), lambda args: (args[0].copy(),)
    yield ("aab_core 400x200 eps=1e-10", "aab_core",
           (A, b, 1e-4, 1e-10, 400, BREAKDOWN_TOL), None)
    small = np.ascontiguousarray(rng.standard_normal((60, 30)))
    yield ("aab_core 60x30 eps=0.1 (inner solve size)", "aab_core",
           (small, rng.standard_normal(30), 1e-2, 0.1, 30, BREAKDOWN_TOL), None)


def end_to_end(repeat, rng):
    from mihs.problems import generate_problem
    from mihs.solvers import Empirical, SolverConfig, m_ihs
    import mihs.subsolver as sub

    p = generate_problem(8192, 128, "philips", 1e6, 0.01, seed=1).with_lambda(1e-3)
    cfg = SolverConfig(m=512, sketch="countsketch", momentum=Empirical(100), iters=20)
    out = {}
    original = sub.aab_solve
    for backend in ("numpy", "cython"):
        if backend == "cython" and not _backend.HAVE_COMPILED:
            continue

        def patched(*a, _b=backend, **k):
            k["backend"] = _b
            return original(*a, **k)

        import mihs.solvers as solvers
        solvers.aab_solve = patched
        orig_apply = solvers.apply_sketch
        solvers.apply_sketch = lambda S, M, flops=None, _b=backend: apply_sketch(
            S, M, flops, backend=_b)
        try:
            out[backend] = best_time(lambda: m_ihs(p, cfg, "inexact"), repeat)
        finally:
            solvers.aab_solve = original
            solvers.apply_sketch = orig_apply
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write the results here")
    args = ap.parse_args(argv)
    rng = make_rng(0)

    if not _backend.HAVE_COMPILED:
        print("compiled kernels not available; timing the NumPy fallback only")
    rows = []
    for label, name, fargs, fresh in cases(rng):
        times = {}
        for backend in ("numpy", "cython"):
            if backend == "cython" and not _backend.HAVE_COMPILED:
                continue
            fn = _backend.get(name, backend)
            call = (lambda: fn(*fresh(fargs))) if fresh else (lambda: fn(*fargs))
            times[backend] = best_time(call, args.repeat)
        rows.append((label, times))
    rows.append(("m_ihs inexact 8192x128, 20 iters (end to end)", end_to_end(args.repeat, rng)))

    width = max(len(r[0]) for r in rows)
    print(f"{'case':<{width}}  {'numpy [ms]':>11}  {'cython [ms]':>11}  {'speedup':>8}")
    for label, t in rows:
        c = t.get("cython", math.nan)
        print(f"{label:<{width}}  {1e3 * t['numpy']:11.3f}  {1e3 * c:11.3f}  "
              f"{t['numpy'] / c:8.2f}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({label: t for label, t in rows}, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
