#!/usr/bin/env python3
"""Benchmark the compiled bit kernels against the pure-Python fallback.

Times the two operations behind every Hamiltonian assembly and 1RDM
extraction -- per-mode occupations and the full set of a+_p a_q hopping
tables -- on growing sector sizes.  Run after `pip install -e .`:

    python benchmarks/bench_kernels.py
"""

import math
import time
from itertools import combinations

import numpy as np

from hklab._kernels import _pure

try:
    from hklab._kernels import _core
except ImportError:
    _core = None

CASES = [
    # (num_modes, num_particles)
    (12, 2),
    (14, 3),
    (16, 4),
    (18, 4),
    (20, 4),
]


def sector_masks(num_modes, num_particles):
    masks = np.fromiter(
        (sum(1 << i for i in combo) for combo in combinations(range(num_modes), num_particles)),
        dtype=np.uint64,
        count=math.comb(num_modes, num_particles),
    )
    masks.sort()
    return masks


def time_backend(backend, masks, num_modes, repeats=3):
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        backend.occupations(masks, num_modes)
        for p in range(num_modes):
            for q in range(num_modes):
                if p != q:
                    backend.hopping_entries(masks, p, q)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    if _core is None:
        print("compiled kernel not built; only timing the pure fallback")
    header = f"{'modes':>6} {'N':>3} {'dim':>8} {'pure [ms]':>12} {'compiled [ms]':>14} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for num_modes, num_particles in CASES:
        masks = sector_masks(num_modes, num_particles)
        t_pure = time_backend(_pure, masks, num_modes)
        if _core is not None:
            t_core = time_backend(_core, masks, num_modes)
            rows, cols, signs = _core.hopping_entries(masks, 0, 1)
            ref = _pure.hopping_entries(masks, 0, 1)
            assert all(np.array_equal(a, b) for a, b in zip((rows, cols, signs), ref))
            print(
                f"{num_modes:>6} {num_particles:>3} {len(masks):>8} "
                f"{1e3 * t_pure:>12.2f} {1e3 * t_core:>14.2f} {t_pure / t_core:>8.1f}x"
            )
        else:
            print(f"{num_modes:>6} {num_particles:>3} {len(masks):>8} {1e3 * t_pure:>12.2f}")


if __name__ == "__main__":
    main()
