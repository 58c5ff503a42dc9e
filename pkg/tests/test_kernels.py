"""The numba kernels and their numpy fallbacks must agree bit for bit."""
import os
import subprocess
import sys
from itertools import product

import numpy as np
import pytest

from nicd import _kernels as K
from nicd.boolfn import cube_points
from nicd.search import odd_tables

needs_numba = pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba not installed")


@pytest.fixture
def tables(rng):
    return rng.choice(np.array([-1, 1], dtype=np.int8), size=(300, 32))


@needs_numba
def test_fwht(tables):
    a = tables.astype(np.int64)
    assert np.array_equal(K.fwht_numpy(a), K.fwht_numba(a))
    # involution up to scale
    assert np.array_equal(K.fwht_numpy(K.fwht_numpy(a)), 32 * a)


@needs_numba
@pytest.mark.parametrize("n", [1, 3, 5])
def test_profiles(rng, n):
    t = rng.choice(np.array([-1, 1], dtype=np.int8), size=(200, 1 << n))
    a_np, s_np = K.profiles_numpy(t, n, chunk=37)
    a_nb, s_nb = K.profiles_numba(t, n)
    assert np.array_equal(a_np, a_nb) and np.array_equal(s_np, s_nb)
    assert a_np.shape == (200, n + 1)


def test_subcube_sums_against_definition(rng):
    n = 3
    t = rng.choice(np.array([-1, 1], dtype=np.int8), size=(5, 8))
    sums = K.subcube_sums_numpy(t, n)
    pts = cube_points(n)
    for idx, digits in enumerate(product(range(3), repeat=n)):
        digits = digits[::-1]  # digit i is coordinate i, little-endian
        mask = np.ones(8, dtype=bool)
        for i, d in enumerate(digits):
            if d < 2:
                mask &= pts[:, i] == (1 if d == 0 else -1)
        assert np.array_equal(sums[:, idx], t[:, mask].sum(axis=1))


@needs_numba
@pytest.mark.parametrize("n, negate", [(3, False), (4, True), (5, False), (5, True)])
def test_orbit_min(rng, n, negate):
    maps = K.permutation_maps(n)
    for bits in rng.integers(0, 2, size=(50, 1 << n)):
        assert np.array_equal(K.orbit_min_numpy(bits, maps, negate), K.orbit_min_numba(bits, maps, negate))


@needs_numba
def test_orbit_min_wide_path(rng):
    # n = 7 has 128-entry tables and takes the lexicographic branch
    maps = K.permutation_maps(7)
    for bits in rng.integers(0, 2, size=(2, 128)):
        assert np.array_equal(K.orbit_min_numpy(bits, maps, True), K.orbit_min_numba(bits, maps, True))


@needs_numba
def test_extension_eval(rng):
    coeffs = rng.normal(size=32)
    z = rng.integers(-1, 2, size=(5000, 5)).astype(np.int8)
    a = K.extension_eval_numpy(coeffs, z, chunk=999)
    b = K.extension_eval_numba(coeffs, z)
    assert np.allclose(a, b, rtol=0, atol=1e-12)


def test_extension_eval_on_cube_recovers_table():
    t = odd_tables(3)[5].astype(np.int64)
    coeffs = K.fwht_numpy(t[None, :])[0] / 8.0
    pts = cube_points(3)
    assert np.allclose(K.extension_eval_numpy(coeffs, pts), t)


@pytest.mark.parametrize("size", [6, 9])
def test_sign_sum_extremes_brute_force(rng, size):
    s = rng.integers(-4, 5, size=size)
    vals = sorted({int(np.dot(e, s)) for e in product((1, -1), repeat=size)}, reverse=True)
    best = vals[0]
    count = sum(int(np.dot(e, s)) == best for e in product((1, -1), repeat=size))
    got = K.sign_sum_extremes_numpy(s, chunk=3)
    assert got == (best, count, vals[1])
    if K.HAVE_NUMBA:
        assert K.sign_sum_extremes_numba(s) == got


def test_backend_switch():
    old = K.backend()
    try:
        K.set_backend("numpy")
        assert K.backend() == "numpy"
        with pytest.raises(ValueError):
            K.set_backend("cuda")
    finally:
        K.set_backend(old)


def test_env_flag_selects_numpy():
    env = dict(os.environ, NICD_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "from nicd import _kernels; print(_kernels.backend())"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numpy"
