#!/usr/bin/env python3
"""Time the RK4 kernel on both backends for the reference trajectory.

    python benchmarks/bench_rk4.py [--t-end 15] [--dt 1e-3] [--repeat 5]

The numba timing excludes compilation (one warm-up call first). Both
backends must produce the same samples to within rounding.
"""

import argparse
import time

import numpy as np

from lindblad_pair import kernels
from lindblad_pair._backend import HAS_NUMBA
from lindblad_pair.dynamics import LindbladCouplings, OscillatorParams, affine_system
from lindblad_pair.integrator import IntegratorConfig
from lindblad_pair.simon import SimonParams, to_covariance_state


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--t-end", type=float, default=15.0)
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--stride", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    osc = OscillatorParams(1.0, 3.0, 1.0)
    h = LindbladCouplings.from_damping(osc, 0.25, 0.25, h11=1, h22=2, h33=1, h44=4, h13r=1, h24r=1, h12r=1)
    m, c = affine_system(osc, h)
    x0 = to_covariance_state(SimonParams(0.5, 0.5, 0.5, 0.5, 0.5, -0.5)).as_array()
    n_full, last = IntegratorConfig(t_end=args.t_end, dt=args.dt).step_plan()

    def run(backend):
        return kernels.rk4_affine(m, c, x0, args.dt, n_full, last, args.stride, backend)[0]

    print(f"{n_full} RK4 steps of dt={args.dt:g}, best of {args.repeat}")
    t_np, out_np = best_of(lambda: run("numpy"), args.repeat)
    print(f"numpy  {t_np * 1e3:9.2f} ms  ({t_np / n_full * 1e6:.3f} us/step)")
    if not HAS_NUMBA:
        print("numba  not installed")
        return
    t0 = time.perf_counter()
    run("numba")
    print(f"numba  first call incl. compile/cache load {(time.perf_counter() - t0) * 1e3:.1f} ms")
    t_nb, out_nb = best_of(lambda: run("numba"), args.repeat)
    print(f"numba  {t_nb * 1e3:9.2f} ms  ({t_nb / n_full * 1e6:.3f} us/step)")
    print(f"speedup {t_np / t_nb:.1f}x, max |numba - numpy| = {np.abs(out_nb - out_np).max():.2e}")


if __name__ == "__main__":
    main()
