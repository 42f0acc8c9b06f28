"""Benchmark of the lattice-counting backends: compiled versus numpy.

Run as python -m saddlekit.benchmark [--samples N] [--radius R].  The
workload mirrors the Monte Carlo hot loop: counting primitive points of
Haar-random lattices in a disc.  Both backends are checked for identical
counts before timing.
"""

from __future__ import annotations

import argparse
import time

from . import kernels, mc


def run(samples: int = 400, radius: float = 20.0, seed: int = 11) -> dict:
    haar = mc.sample_torus_haar(samples, seed=seed)
    mats = [tuple(float(x) for x in p.g.entries()) for p in haar.points]
    results = {}
    counts = {}
    for name, mod in kernels.backends().items():
        t0 = time.perf_counter()
        total = [mod.count_primitive_in_disc(a, b, c, d, radius) for a, b, c, d in mats]
        results[name] = time.perf_counter() - t0
        counts[name] = total
    names = list(counts)
    for other in names[1:]:
        if counts[other] != counts[names[0]]:
            raise AssertionError(f"backend mismatch: {names[0]} vs {other}")
    return {"timings": results, "n": samples, "radius": radius, "agree": True}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=400)
    parser.add_argument("--radius", type=float, default=20.0)
    parser.add_argument("--seed", type=int, default=11)
    args = parser.parse_args(argv)
    out = run(args.samples, args.radius, args.seed)
    print(f"workload: {out['n']} lattices, radius {out['radius']} (counts agree)")
    base = None
    for name, dt in sorted(out["timings"].items()):
        rate = out["n"] / dt
        line = f"  {name:>9}: {dt:8.3f}s  ({rate:9.1f} counts/s)"
        if base is None:
            base = dt
        else:
            line += f"  speedup x{base / dt:.1f}" if dt < base else f"  slowdown x{dt / base:.1f}"
        print(line)
    if "compiled" not in out["timings"]:
        print("  compiled backend unavailable (extension not built)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
