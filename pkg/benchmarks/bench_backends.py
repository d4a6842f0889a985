"""Compare the numba and numpy backends on assembly, banded solve and a full step.

Usage::

    python benchmarks/bench_backends.py --J 1024 4096 --repeat 20
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from elasticflow._accel import HAVE_NUMBA
from elasticflow.curves import gen_rect_elastica
from elasticflow.fem import FlowState, assemble_step, step


def _time(fn, repeat):
    fn()  # warm-up, triggers compilation
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--J", type=int, nargs="+", default=[1024, 4096])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)
    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    print(f"{'J':>6} {'backend':>7} {'assemble ms':>12} {'solve ms':>9} {'step ms':>8}")
    for J in args.J:
        state = FlowState(0.0, 0, gen_rect_elastica(1, J, b=1.0))
        sols = {}
        for be in backends:
            system = assemble_step(state, 1e-4, be)
            ta = _time(lambda: assemble_step(state, 1e-4, be), args.repeat)
            ts = _time(lambda: system.solve(be), args.repeat)
            tt = _time(lambda: step(state, 1e-4, be), args.repeat)
            sols[be] = step(state, 1e-4, be).curve.x
            print(f"{J:>6} {be:>7} {1e3 * ta:12.3f} {1e3 * ts:9.3f} {1e3 * tt:8.3f}")
        if len(sols) == 2:
            diff = float(np.abs(sols["numba"] - sols["numpy"]).max())
            print(f"{'':>6} max |x_numba - x_numpy| = {diff:.2e}")


if __name__ == "__main__":
    main()
