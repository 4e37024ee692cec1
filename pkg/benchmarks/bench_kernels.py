"""Time the numba kernels against their numpy twins on representative loads.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from nhskin import _kernels
from nhskin.dynamics import dynamical_matrix, launch_state
from nhskin.config import fig3_params
from nhskin.optimize import GRID, BOX, BOX_LOW, _rates
from nhskin.scattering import chain_blocks


def optimizer_grid(n=20):
    axis = np.geomspace(BOX_LOW, BOX, GRID)
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    delta, v, w = _rates(xx.ravel(), yy.ravel(), 0.1)
    return chain_blocks(n, delta, v, w, w, 1j * w, -1j * w, 0.1)


def cases():
    D, U, L = optimizer_grid()
    rng = np.random.default_rng(0)
    B = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    p = fig3_params(-0.5, n=10)
    A, psi0, times = dynamical_matrix(p), launch_state(p, "left"), np.linspace(0, 60, 601)
    return {
        "corner_greens 64x64 grid, n=20": (
            lambda: _kernels.corner_greens_numba(D, U, L),
            lambda: _kernels.corner_greens_numpy(D, U, L),
        ),
        "phase_grid_max 256x256": (
            lambda: _kernels.phase_grid_max_numba(B, 256),
            lambda: _kernels.phase_grid_max_numpy(B, 256),
        ),
        "dopri5 n=10, t=60": (
            lambda: _kernels.dopri5_numba(A, psi0, times),
            lambda: _kernels.dopri5_numpy(A, psi0, times),
        ),
    }


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    print(f"{'kernel':34s} {'numba (ms)':>12s} {'numpy (ms)':>12s} {'speedup':>8s}")
    for name, (fast, slow) in cases().items():
        fast()  # compile outside the timing
        t_fast = min(timeit.repeat(fast, number=1, repeat=args.repeat))
        t_slow = min(timeit.repeat(slow, number=1, repeat=args.repeat))
        print(f"{name:34s} {1e3 * t_fast:12.3f} {1e3 * t_slow:12.3f} {t_slow / t_fast:8.1f}x")


if __name__ == "__main__":
    main()
