import warnings
from fractions import Fraction
from math import comb

import numpy as np
import pytest

from nicd.boolfn import BooleanFunction, CubeSymmetry, apply_symmetry, constant, dictator, from_ltf, majority, wht
from nicd.erasure import (
    BiasedFunctionWarning,
    ErasureModel,
    Ordering,
    compare_phi,
    conditional_means,
    curve,
    erasure_profile,
    level1_sum,
    level1_sum_abs,
    parse_grid,
    phi_at,
    phi_poly,
    phi_poly_from_profile,
    phi_report,
    profile_value,
    rational_grid,
    stab_poly,
    stab_poly_from_profile,
    stab_via_erasure,
    support_terms,
)
from nicd.exact import RationalPoly, bernstein_basis, poly_eval
from nicd.search import odd_tables

P_SAMPLES = [Fraction(1, 7), Fraction(2, 5), Fraction(13, 17)]


def random_function(rng, n):
    return BooleanFunction(n, rng.choice(np.array([-1, 1], dtype=np.int8), size=1 << n))


def random_odd(rng, n):
    tables = odd_tables(n)
    return BooleanFunction(n, tables[int(rng.integers(tables.shape[0]))])


def test_golden_polynomials(f5, maj5):
    assert phi_poly(maj5) == [0, Fraction(15, 8), Fraction(-15, 4), Fraction(25, 4), Fraction(-45, 8), Fraction(9, 4)]
    assert phi_poly(f5) == [0, Fraction(7, 4), Fraction(-11, 4), Fraction(7, 2), Fraction(-5, 2), 1]
    assert phi_poly(majority(3)) == [0, Fraction(3, 2), Fraction(-3, 2), 1]
    assert phi_poly(dictator(1, 4)) == [0, 1]


def test_golden_values(f5, maj5):
    p = Fraction(2, 5)
    assert phi_at(f5, p) == Fraction(2689, 6250)
    assert phi_at(maj5, p) == Fraction(5363, 12500)
    assert phi_at(f5, 0) == 0


def test_stab_golden(maj5, f5):
    assert stab_poly(majority(3)) == [0, Fraction(3, 4), 0, Fraction(1, 4)]
    assert stab_poly(maj5) == [0, Fraction(45, 64), 0, Fraction(10, 64), 0, Fraction(9, 64)]
    assert stab_poly(dictator(2, 3)) == [0, 1]
    assert stab_via_erasure(maj5, Fraction(2, 5)) == stab_poly(maj5)(Fraction(2, 5))
    assert stab_via_erasure(f5, 1) == 1
    assert all(stab_via_erasure(dictator(1, 3), p) == p for p in P_SAMPLES)


def test_conditional_means_maj5(maj5):
    assert conditional_means(maj5) == [0, Fraction(3, 8), Fraction(3, 8), Fraction(5, 8), Fraction(5, 8), 1]


def test_support_terms_recombine(f5):
    terms = support_terms(f5)
    poly = sum((bernstein_basis(5, k).scale(a) for k, a in enumerate(terms)), RationalPoly())
    assert poly == phi_poly(f5)


def test_level1(f5, maj5):
    assert level1_sum_abs(maj5) == Fraction(15, 8) == level1_sum(maj5)
    assert level1_sum_abs(f5) == Fraction(7, 4)
    assert level1_sum_abs(dictator(3, 5)) == 1


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_two_paths_agree(rng, n):
    for _ in range(6):
        f = random_odd(rng, n) if n % 2 else random_function(rng, n)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BiasedFunctionWarning)
            poly = phi_poly(f)
            for p in P_SAMPLES:
                assert phi_at(f, p) == poly(p)
        abs_prof, sq_prof = erasure_profile(f)
        assert phi_poly_from_profile(abs_prof, n) == poly
        assert stab_poly_from_profile(sq_prof, n) == stab_poly(f)
        assert profile_value(abs_prof, n, Fraction(3, 11)) == poly(Fraction(3, 11))


def test_stab_oracle_random_n5(rng):
    for _ in range(50):
        f = random_function(rng, 5)
        poly = stab_poly(f)
        for p in P_SAMPLES:
            assert stab_via_erasure(f, p) == poly_eval(poly, p)


def test_l1_l2_bound(rng):
    for _ in range(40):
        f = random_odd(rng, 5)
        for p in P_SAMPLES:
            assert phi_at(f, p) ** 2 <= stab_poly(f)(p)


def test_boundary_values(rng):
    for _ in range(20):
        f = random_odd(rng, 5)
        poly = phi_poly(f)
        assert poly[0] == 0
        assert poly(1) == 1
        assert sum(stab_poly(f).coeffs) == 1
        assert all(c >= 0 for c in stab_poly(f).coeffs)


def test_symmetry_invariance(rng):
    for _ in range(20):
        f = random_odd(rng, 5)
        g = CubeSymmetry.random(5, rng, negation=True)
        h = apply_symmetry(f, g)
        assert phi_poly(h) == phi_poly(f)
        assert stab_poly(h) == stab_poly(f)


def test_k1_contribution_equals_first_order_term(rng):
    # support-size-1 terms of the enumeration: p (1-p)^(n-1) sum |fhat(i)|
    for _ in range(20):
        n = int(rng.choice([3, 5]))
        f = random_odd(rng, n)
        assert support_terms(f)[1] == level1_sum_abs(f)
        assert support_terms(f)[0] == 0


def test_equivalent_ltfs_share_polynomials(f5):
    g = from_ltf([2, 2, 1, 1, 1])
    assert phi_poly(g) == phi_poly(f5)
    assert stab_poly(g) == stab_poly(f5)


def test_compare_phi(f5, maj5):
    assert compare_phi(f5, maj5, Fraction(2, 5)) == (Ordering.GREATER, Fraction(3, 2500))
    assert compare_phi(maj5, f5, Fraction(2, 5))[0] is Ordering.LESS
    assert compare_phi(f5, f5, Fraction(1, 3)) == (Ordering.EQUAL, 0)
    assert compare_phi(f5, maj5, Fraction(1, 100))[0] is Ordering.LESS
    with pytest.raises(ValueError):
        compare_phi(f5, majority(3), Fraction(1, 2))


def test_p_validation(f5):
    with pytest.raises(ValueError):
        phi_at(f5, Fraction(3, 2))
    with pytest.raises(ValueError):
        stab_via_erasure(f5, -1)
    with pytest.raises(ValueError):
        ErasureModel(5, Fraction(1))
    m = ErasureModel(3, Fraction(1, 2))
    assert sum(comb(3, k) * 2**k * m.point_probability(k) for k in range(4)) == 1


def test_biased_input_warns_but_computes():
    f = constant(3)
    with pytest.warns(BiasedFunctionWarning):
        poly = phi_poly(f)
    assert poly == [1]


def test_phi_report(f5):
    report = phi_report(f5, "ltf:1,-3,1,-1,3", Fraction(2, 5))
    obj = report.to_json()
    assert list(obj) == ["spec", "phi_poly", "p", "phi_at_p", "decimal"]
    assert obj["phi_at_p"] == {"num": "2689", "den": "6250"}
    assert report.decimal.startswith("0.43024")


def test_grids_and_curve(maj5):
    grid = parse_grid("0:1:1/100")
    assert len(grid) == 101 and grid[0] == 0 and grid[-1] == 1
    assert rational_grid(0, Fraction(1, 2), Fraction(1, 4)) == [0, Fraction(1, 4), Fraction(1, 2)]
    rows = curve([maj5], [Fraction(1, 2)])
    assert rows[0][1][0] == phi_poly(maj5)(Fraction(1, 2))
    assert rows[0][2][0] == stab_poly(maj5)(Fraction(1, 2))
    with pytest.raises(ValueError):
        parse_grid("0:1")
