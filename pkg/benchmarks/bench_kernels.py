"""Compare the compiled and numpy lhs kernels.

Run with ``python benchmarks/bench_kernels.py``. Times a single frame
evaluation (the simplex inner loop) and a full 64x64 frame grid.
"""

import argparse
import timeit

import numpy as np

from steerkit.core import as_density, named_state, ptrace_array
from steerkit.kernels import backends
from steerkit.search import frame_grid


def _inputs(name="generalized_w_example"):
    rho = as_density(named_state(name)).entries
    return rho, ptrace_array(rho, (0, 1)), ptrace_array(rho, (0, 2))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--grid", type=int, default=64)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    rho, rab, rac = _inputs()
    grid = frame_grid(args.grid, 2)
    grid = np.concatenate([grid, grid], axis=1)
    single = grid[:1]
    impls = backends()
    ref = impls["python"](rho, rab, rac, grid)
    rows = []
    for name, fn in impls.items():
        diff = float(np.max(np.abs(fn(rho, rab, rac, grid) - ref)))
        t1 = min(timeit.repeat(lambda: fn(rho, rab, rac, single), number=200, repeat=args.repeat)) / 200
        tg = min(timeit.repeat(lambda: fn(rho, rab, rac, grid), number=1, repeat=args.repeat))
        rows.append((name, t1, tg, diff))
    print(f"{'backend':<8} {'single [us]':>12} {'grid {0}x{0} [ms]'.format(args.grid):>18} {'max |diff|':>11}")
    for name, t1, tg, diff in rows:
        print(f"{name:<8} {t1 * 1e6:12.1f} {tg * 1e3:18.1f} {diff:11.2e}")
    if len(rows) == 2:
        (_, p1, pg, _), (_, c1, cg, _) = sorted(rows, key=lambda r: r[0] != "python")
        print(f"speedup: single {p1 / c1:.1f}x, grid {pg / cg:.1f}x")


if __name__ == "__main__":
    main()
