"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from nicd import _kernels as K
from nicd.boolfn import majority
from nicd.erasure import fourier
from nicd.montecarlo import chunk_rng, sample_z
from nicd.search import odd_tables


def best_of(fn, repeat):
    fn()  # warm-up, includes JIT compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not K.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    tables = odd_tables(5)
    maps5 = K.permutation_maps(5)
    bits = ((1 - tables[:2000].astype(np.int64)) // 2)
    coeffs = fourier(majority(5)).as_floats()
    z = sample_z(5, 0.4, chunk_rng(0, 0), 10**6)
    wide = tables.astype(np.int64)

    cases = [
        ("profiles, 65536 odd n=5 tables", lambda: K.profiles_numpy(tables, 5), lambda: K.profiles_numba(tables, 5)),
        ("orbit_min, 2000 n=5 tables",
         lambda: [K.orbit_min_numpy(b, maps5, False) for b in bits],
         lambda: [K.orbit_min_numba(b, maps5, False) for b in bits]),
        ("extension_eval, 1e6 samples", lambda: K.extension_eval_numpy(coeffs, z), lambda: K.extension_eval_numba(coeffs, z)),
        ("fwht, 65536 x 32", lambda: K.fwht_numpy(wide), lambda: K.fwht_numba(wide)),
        ("sign_sum_extremes, 2^24", lambda: K.sign_sum_extremes_numpy(np.arange(24) % 5 - 2),
         lambda: K.sign_sum_extremes_numba(np.arange(24) % 5 - 2)),
    ]
    print(f"{'kernel':<34}{'numpy [s]':>11}{'numba [s]':>11}{'speedup':>9}")
    for name, slow, fast in cases:
        t_np, t_nb = best_of(slow, args.repeat), best_of(fast, args.repeat)
        print(f"{name:<34}{t_np:>11.4f}{t_nb:>11.4f}{t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
