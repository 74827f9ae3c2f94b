"""Compare the compiled and NumPy RK4 kernels on a default-pulse workload.

    python benchmarks/bench_kernels.py [--steps N] [--repeat R]
"""

import argparse
import time

import numpy as np

from qperceptron import units
from qperceptron.dynamics import PerceptronConfig, _half_step_samples, collapse_operators
from qperceptron.kernels import BACKEND, python_backend

try:
    from qperceptron import _kernels as compiled
except ImportError:
    compiled = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=20_000)
    ap.add_argument("--points", type=int, default=61, help="final detunings in the two-level batch")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    cfg = PerceptronConfig(weights=(-5.2 * units.MHZ,), bias_b=2.8 * units.MHZ)
    sched = cfg.schedule()
    base, amp = _half_step_samples(sched, args.steps)
    dt = sched.duration / args.steps
    offs = np.linspace(-15, 15, args.points) * units.MHZ
    block_offs = np.array([cfg.final_detuning(x) for x in cfg.bitstrings()])
    jumps = collapse_operators(2, 20e-6)
    rho = np.zeros((16, 4, 4), dtype=complex)
    for k in range(16):
        rho[k, k // 4, k % 4] = 1.0

    print(f"default backend: {BACKEND}; {args.steps} RK4 steps")
    cases = [
        (f"two-level x{args.points}", "propagate_two_level", (base, amp, offs, dt)),
        ("lindblad 4x4 x16", "lindblad_rk4", (base, amp, block_offs, jumps, rho, dt)),
    ]
    print(f"{'kernel':<22}{'python [s]':>12}{'compiled [s]':>14}{'speedup':>10}{'max diff':>12}")
    for label, name, argv in cases:
        tp, ref = best_of(lambda: getattr(python_backend, name)(*argv), args.repeat)
        if compiled is None:
            print(f"{label:<22}{tp:>12.4f}{'n/a':>14}")
            continue
        tc, out = best_of(lambda: getattr(compiled, name)(*argv), args.repeat)
        print(f"{label:<22}{tp:>12.4f}{tc:>14.4f}{tp / tc:>10.1f}{np.abs(out - ref).max():>12.2e}")


if __name__ == "__main__":
    main()
