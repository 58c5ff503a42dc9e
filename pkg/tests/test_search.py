import io
import json
from fractions import Fraction

import numpy as np
import pytest

from nicd.boolfn import BooleanFunction, CubeSymmetry, apply_symmetry, canonical_form, dictator, from_ltf, is_odd, majority, render_function
from nicd.erasure import Ordering, phi_at, phi_poly
from nicd.search import (
    CandidateFamily,
    argmax_phi,
    crossover_scan,
    enumerate_ltf,
    enumerate_odd,
    ltf_candidates,
    odd_tables,
)


@pytest.mark.parametrize("n, count", [(1, 2), (3, 16), (5, 65536)])
def test_odd_family_sizes(n, count):
    tables = odd_tables(n)
    assert tables.shape == (count, 1 << n)
    assert np.unique(tables, axis=0).shape[0] == count
    assert np.array_equal(tables, -tables[:, ::-1])


def test_odd_family_membership(f5, maj5):
    fs = list(enumerate_odd(3))
    assert sum(f in (majority(3), -majority(3)) for f in fs) == 2
    assert all(is_odd(f) for f in fs)
    tables = {bytes(t) for t in odd_tables(5).view(np.uint8)}
    assert bytes(f5.table.view(np.uint8)) in tables and bytes(maj5.table.view(np.uint8)) in tables
    assert list(enumerate_odd(1)) == [dictator(1, 1), -dictator(1, 1)]


def test_odd_family_cap():
    with pytest.raises(ValueError, match="2\\^16"):
        odd_tables(7)


def test_ltf_family(f5):
    w3 = list(enumerate_ltf(5, 3))
    assert f5 in w3
    assert len(set(w3)) == len(w3)
    assert all(is_odd(f) for f in w3)
    assert set(enumerate_ltf(1, 1)) == {dictator(1, 1), -dictator(1, 1)}


def test_ltf_w1_majority_pattern(maj5):
    pairs = ltf_candidates(5, 1, allow_zero=False)
    assert len(pairs) == 32
    assert all(all(abs(w) == 1 for w in weights) for weights, _ in pairs)
    classes = {canonical_form(f) for _, f in pairs}
    assert classes == {canonical_form(maj5)}
    assert len(ltf_candidates(5, 1, dedupe=True, allow_zero=False)) == 1


def test_ltf_dedupe_soundness():
    fs = list(enumerate_ltf(5, 3, dedupe=True))
    forms = [canonical_form(f) for f in fs]
    assert len(set(forms)) == len(forms)
    # every class of the raw family is represented
    raw = {canonical_form(f) for f in enumerate_ltf(5, 2)}
    assert raw <= set(forms)


def test_exhaustive_odd_n5_at_two_fifths(f5, maj5):
    report = argmax_phi(CandidateFamily.odd(5), Fraction(2, 5))
    assert report.best_value == Fraction(2689, 6250)
    assert report.best_value >= report.majority_value
    assert report.majority_in_argmax is False
    assert report.argmax == [canonical_form(f5)]
    assert report.argmax_raw_count == 320
    assert report.margin_over_majority == Fraction(3, 2500)
    assert report.candidates_scanned == 65536


def test_argmax_closed_under_symmetry():
    report = argmax_phi(CandidateFamily.odd(5), Fraction(2, 5))
    f = report.argmax[0]
    rng = np.random.default_rng(3)
    for _ in range(10):
        g = apply_symmetry(f, CubeSymmetry.random(5, rng, negation=False))
        assert canonical_form(g) in report.argmax
        assert phi_at(g, Fraction(2, 5)) == report.best_value


def test_small_p_n3_majority_wins():
    report = argmax_phi(CandidateFamily.odd(3), Fraction(1, 100))
    assert report.argmax == [canonical_form(majority(3))]
    assert report.majority_in_argmax


def test_ltf_family_argmax_contains_f(f5):
    report = argmax_phi(CandidateFamily.ltf(5, 3), Fraction(2, 5))
    assert canonical_form(f5) in report.argmax
    assert report.witnesses[canonical_form(f5)] == (1, 1, 1, 2, 2)


@pytest.mark.parametrize("seed", [0])
def test_prefilter_soundness(seed):
    rng = np.random.default_rng(seed)
    family = CandidateFamily.odd(5)
    for _ in range(5):
        p = Fraction(int(rng.integers(1, 100)), 100)
        exact = argmax_phi(family, p)
        fast = argmax_phi(family, p, prefilter=True)
        assert fast.best_value == exact.best_value
        assert fast.argmax == exact.argmax
        assert fast.argmax_raw_count == exact.argmax_raw_count
        assert fast.exactly_scored <= exact.exactly_scored


def test_argmax_against_random_subsample():
    rng = np.random.default_rng(11)
    tables = odd_tables(5)
    picks = rng.choice(tables.shape[0], size=1000, replace=False)
    fs = [BooleanFunction(5, tables[i]) for i in picks]
    p = Fraction(2, 5)
    report = argmax_phi(CandidateFamily.explicit(fs), p)
    assert report.best_value == max(phi_poly(f)(p) for f in fs)
    assert report.candidates_scanned == 1000


def test_explicit_family_and_empty():
    fs = [majority(3), dictator(1, 3)]
    report = argmax_phi(CandidateFamily.explicit(fs), Fraction(1, 2))
    assert report.best_value == Fraction(1, 2) and len(report.argmax) == 2
    with pytest.raises(ValueError):
        CandidateFamily.explicit([])
    with pytest.raises(ValueError):
        argmax_phi(CandidateFamily.odd(3), Fraction(1))


def test_determinism_across_workers():
    family = CandidateFamily.odd(5)
    one = argmax_phi(family, Fraction(1, 3), workers=1, chunk=8192)
    two = argmax_phi(family, Fraction(1, 3), workers=2, chunk=8192)
    assert one.to_json(timing=False) == two.to_json(timing=False)
    assert json.dumps(one.to_json(timing=False)) == json.dumps(two.to_json(timing=False))


def test_progress_and_checkpoint_resume(tmp_path):
    family = CandidateFamily.odd(5)
    path = tmp_path / "scan.ckpt"
    stream = io.StringIO()
    first = argmax_phi(family, Fraction(2, 5), progress=stream, checkpoint=path, chunk=16384)
    lines = [json.loads(l) for l in stream.getvalue().splitlines()]
    assert len(lines) == 4 and lines[-1]["done"] == 65536
    # drop one finished range, as if the scan was interrupted
    data = json.loads(path.read_text())
    data["ranges"].pop("49152")
    path.write_text(json.dumps(data))
    stream = io.StringIO()
    resumed = argmax_phi(family, Fraction(2, 5), progress=stream, checkpoint=path, chunk=16384)
    assert len(stream.getvalue().splitlines()) == 1
    assert resumed.to_json(timing=False) == first.to_json(timing=False)
    # a different p does not reuse the checkpoint
    other = argmax_phi(family, Fraction(1, 2), checkpoint=path, chunk=16384)
    assert other.best_value == Fraction(1, 2)


def test_report_json_shape():
    obj = argmax_phi(CandidateFamily.odd(3), Fraction(1, 4)).to_json(timing=False)
    assert "wall_time" not in obj
    assert obj["best_value"]["den"]
    assert obj["argmax"] == [render_function(canonical_form(majority(3)))]


def test_crossover_f_vs_majority(f5, maj5):
    scan = crossover_scan(f5, maj5, Fraction(1, 100))
    by_p = {p: o for p, _, o in scan.points}
    assert by_p[Fraction(1, 100)] is Ordering.LESS
    assert by_p[Fraction(2, 5)] is Ordering.GREATER
    assert (Fraction(27, 100), Fraction(28, 100)) in scan.brackets


def test_crossover_trivial_and_dictator():
    f = majority(3)
    scan = crossover_scan(f, f, Fraction(1, 10))
    assert all(o is Ordering.EQUAL for _, _, o in scan.points)
    assert scan.brackets == []
    scan = crossover_scan(dictator(1, 3), majority(3), Fraction(1, 10))
    by_p = {p: o for p, _, o in scan.points}
    assert by_p[Fraction(1, 2)] is Ordering.EQUAL
    assert by_p[Fraction(3, 10)] is Ordering.LESS and by_p[Fraction(7, 10)] is Ordering.GREATER
    assert scan.brackets == [(Fraction(2, 5), Fraction(3, 5))]
    with pytest.raises(ValueError):
        crossover_scan(f, majority(5), Fraction(1, 10))
