"""Compare the numba kernels with the pure-numpy fallback.

Run with ``python benchmarks/bench_kernels.py [--repeat N] [--size N]``.
Each row reports the best of ``repeat`` runs per backend and the speedup of
numba over numpy.  The first numba call of each kernel is made before timing,
so compilation (or loading from the on-disk cache) is not counted.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from tsstieltjes import IntegratorConfig, integrate, kernels, parse, parse_scale

EXPR = "exp(t)*(1+t^3)/(2+t^2) - sqrt(1+t)"


def _cases(size: int):
    f = parse(EXPR)
    g = parse("t^3+t")
    ts = np.linspace(0.0, 2.0, size)
    lo = ts[:-1]
    hi = ts[1:]
    ys = np.sort(g.eval_many(ts))[1:-1]
    unit = parse_scale("interval(0,1)")
    mixed = parse_scale("union(qscale(2); interval(1.5,2); points(2.5,3))")

    def run_integrate(scale, b, tol):
        return lambda: integrate("1+t", "t^2", scale, 0, b, "delta", IntegratorConfig(tol=tol))

    return [
        (f"eval_points  n={size}", lambda be: be.eval_points(f.program, ts)),
        (f"eval_boxes   n={size}", lambda be: be.eval_boxes(f.program, lo, hi)),
        (f"invert       n={len(ys)}", lambda be: be.invert_increasing(g.program, 0.0, 2.0, ys, 0.0, 1e-13)),
        ("integrate    interval tol=1e-5", lambda be: run_integrate(unit, 1, 1e-5)()),
        ("integrate    mixed tol=1e-4", lambda be: run_integrate(mixed, 3, 1e-4)()),
    ]


def _best(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=1_000_000)
    args = ap.parse_args(argv)

    names = kernels.available()
    if "numba" not in names:
        print("numba backend unavailable; only numpy timings are shown")
    rows = []
    for label, job in _cases(args.size):
        times = {}
        for name in names:
            with kernels.use(name) as be:
                job(be)  # warm up
                times[name] = _best(lambda: job(be), args.repeat)
        rows.append((label, times))

    head = f"{'case':34s}" + "".join(f"{n:>12s}" for n in names) + ("     speedup" if len(names) > 1 else "")
    print(head)
    print("-" * len(head))
    for label, times in rows:
        line = f"{label:34s}" + "".join(f"{times[n] * 1e3:10.1f}ms" for n in names)
        if "numba" in times and "numpy" in times:
            line += f"{times['numpy'] / times['numba']:11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
