from fractions import Fraction

import numpy as np
import pytest

from nicd.boolfn import BooleanFunction, dictator
from nicd.erasure import phi_poly, stab_poly
from nicd.montecarlo import CHUNK, McConfig, chunk_rng, estimate_phi, estimate_sq, sample_z
from nicd.search import odd_tables


def test_config_validation():
    with pytest.raises(ValueError):
        McConfig(0.0, 10)
    with pytest.raises(ValueError):
        McConfig(0.5, 0)


def test_sample_z_edge_laws():
    rng = chunk_rng(1, 0)
    assert not sample_z(5, 0.0, rng, 1000).any()
    z = sample_z(5, 1.0, rng, 1000)
    assert (z != 0).all() and abs(z.mean()) < 0.1
    assert sample_z(3, 0.5, rng).shape == (3,)
    with pytest.raises(ValueError):
        sample_z(3, 1.5, rng)


def test_sample_z_erasure_rate():
    z = sample_z(1, 0.4, chunk_rng(7, 0), 10**6)[:, 0]
    se = (0.6 * 0.4 / 10**6) ** 0.5
    assert abs((z == 0).mean() - 0.6) < 3 * se
    assert abs((z == 1).mean() - (z == -1).mean()) < 6 * se


def test_seed_determinism(f5):
    cfg = McConfig(0.4, 3 * CHUNK + 17, seed=5)
    a, b = estimate_phi(f5, cfg), estimate_phi(f5, cfg)
    assert a == b
    assert estimate_phi(f5, McConfig(0.4, cfg.samples, seed=6)).mean != a.mean


def test_worker_count_independence(maj5):
    one = estimate_phi(maj5, McConfig(0.4, 4 * CHUNK, seed=2, workers=1))
    three = estimate_phi(maj5, McConfig(0.4, 4 * CHUNK, seed=2, workers=3))
    assert one == three


def test_dictator_estimate():
    est = estimate_phi(dictator(2, 5), McConfig(0.3, 200000, seed=1))
    assert abs(est.mean - 0.3) < 4 * est.std_error
    assert est.std_error == pytest.approx((0.3 * 0.7 / 200000) ** 0.5, rel=0.02)


@pytest.mark.parametrize("fixture, exact", [("f5", 0.43024), ("maj5", 0.42904)])
def test_headline_values(request, fixture, exact):
    f = request.getfixturevalue(fixture)
    est = estimate_phi(f, McConfig(0.4, 10**6, seed=0))
    assert abs(est.mean - exact) <= 3 * est.std_error


def _random_pairs(count, seed):
    rng = np.random.default_rng(seed)
    tables = odd_tables(5)
    for _ in range(count):
        f = BooleanFunction(5, tables[int(rng.integers(tables.shape[0]))])
        yield f, Fraction(int(rng.integers(5, 96)), 100)


@pytest.mark.parametrize("squared", [False, True])
def test_consistency_gate(squared):
    hits = 0
    for i, (f, p) in enumerate(_random_pairs(10, 99)):
        cfg = McConfig(float(p), 10**6, seed=i)
        est = estimate_sq(f, cfg) if squared else estimate_phi(f, cfg)
        exact = (stab_poly(f) if squared else phi_poly(f))(p)
        hits += abs(est.mean - float(exact)) <= 4 * est.std_error
    assert hits >= 9


def test_json_records_generator(f5):
    obj = estimate_phi(f5, McConfig(0.4, 1000)).to_json()
    assert "PCG64" in obj["generator"] and obj["samples"] == 1000
