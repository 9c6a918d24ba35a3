"""Compare the compiled and numpy propagation kernels on representative runs.

    python benchmarks/bench_kernel.py [--repeats 5] [--nz 64]
"""

import argparse
import math
import statistics
import time

import numpy as np

from gfcomb import kernel
from gfcomb.medium import CombMedium
from gfcomb.schedule import ControlSchedule, GradientFlip, PhaseRamp
from gfcomb.signals import gaussian
from gfcomb.solver import Grid, simulate


def cases(nz):
    pulse = gaussian(50e-9, dt=0.5e-9)
    gfc = CombMedium.from_comb(9, 0.56e-3, 1e-3, 4 / math.pi, 400e-9)
    wide = CombMedium.from_comb(31, 0.56e-3, 1e-3, 4 / math.pi, 450e-9)
    return [
        ("GFC M=9, 1 us", gfc, ControlSchedule(()), pulse, Grid(0.5e-9, 1e-6, nz)),
        ("SGEM M=9, 0.8 us", gfc, ControlSchedule((GradientFlip(130e-9),)), pulse,
         Grid(0.5e-9, 0.8e-6, nz)),
        ("ramp M=31, 1 us", wide, ControlSchedule((PhaseRamp(60e-9, 1.0),)), pulse,
         Grid(0.5e-9, 1e-6, nz)),
    ]


def timed(fn, repeats):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return statistics.median(times), out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--nz", type=int, default=64)
    args = p.parse_args(argv)

    have_compiled = True
    try:
        kernel.get_propagate("cython")
    except ImportError:
        have_compiled = False
        print("compiled kernel not built; timing the numpy kernel only")

    print(f"{'case':<20}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}{'max diff':>12}")
    rows = []
    for name, med, sched, inp, grid in cases(args.nz):
        t_py, r_py = timed(lambda: simulate(med, sched, inp, grid, backend="python"), args.repeats)
        if have_compiled:
            t_cy, r_cy = timed(lambda: simulate(med, sched, inp, grid, backend="cython"), args.repeats)
            diff = float(np.max(np.abs(r_cy.output.samples - r_py.output.samples))
                         / np.max(np.abs(r_py.output.samples)))
            print(f"{name:<20}{t_py * 1e3:>14.1f}{t_cy * 1e3:>14.1f}{t_py / t_cy:>10.1f}{diff:>12.1e}")
        else:
            t_cy, diff = math.nan, math.nan
            print(f"{name:<20}{t_py * 1e3:>14.1f}{'-':>14}{'-':>10}{'-':>12}")
        rows.append((name, t_py, t_cy, diff))
    return rows


if __name__ == "__main__":
    main()
