"""Exhaustive argmax of Phi_p over candidate families of Boolean functions.

Candidates are scored through integer erasure profiles (see
:func:`nicd.erasure.erasure_profile`), so the verdict is exact; the optional
float prefilter only narrows which candidates get the exact treatment.
"""
from __future__ import annotations

import enum
import itertools
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from . import _kernels
from .boolfn import BooleanFunction, canonical_form, cube_points, majority, render_function
from .erasure import Ordering, phi_poly, profile_value
from .exact import RationalLike, as_rational, poly_eval, rational_to_json, significant_decimal

ODD_ALL_MAX_DIM = 5
PREFILTER_RADIUS = 1e-6
CHUNK = 4096


# ---------------------------------------------------------------------------
# families

def odd_tables(n: int) -> np.ndarray:
    """All odd functions on n bits as a ``(2**(2**(n-1)), 2**n)`` int8 array.

    Row ``j`` takes value -1 at index ``2k`` iff bit ``k`` of ``j`` is set;
    the value at the complementary (odd) index is the negation.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n > ODD_ALL_MAX_DIM:
        raise ValueError(
            f"exhaustive odd-function enumeration is capped at n = {ODD_ALL_MAX_DIM} "
            f"(2^16 candidates); n = {n} would need 2^{1 << (n - 1)}"
        )
    half = 1 << (n - 1)
    size = 1 << n
    j = np.arange(1 << half, dtype=np.int64)[:, None]
    free = (1 - 2 * ((j >> np.arange(half)) & 1)).astype(np.int8)
    out = np.empty((free.shape[0], size), dtype=np.int8)
    even = np.arange(0, size, 2)
    out[:, even] = free
    out[:, size - 1 - even] = -free
    return out


def enumerate_odd(n: int) -> Iterator[BooleanFunction]:
    for row in odd_tables(n):
        yield BooleanFunction(n, row)


def _weight_vectors(n: int, max_weight: int, normalized: bool, allow_zero: bool) -> np.ndarray:
    lo = 0 if normalized else -max_weight
    values = [v for v in range(lo, max_weight + 1) if allow_zero or v != 0]
    if normalized:
        combos = itertools.combinations_with_replacement(values, n)
    else:
        combos = itertools.product(values, repeat=n)
    return np.array(list(combos), dtype=np.int64).reshape(-1, n)


def ltf_candidates(
    n: int, max_weight: int, dedupe: bool = False, allow_zero: bool = True
) -> list:
    """Distinct LTFs ``sgn(w . x)`` with ``w`` in ``{-W..W}^n`` as ``(weights, function)`` pairs.

    Without ``dedupe`` each distinct truth table appears once (first weight
    vector in product order). With ``dedupe`` weight vectors are normalised
    to sorted nonnegative entries first, and each permutation/flip class
    appears once, represented by its canonical form.
    """
    if max_weight < 1:
        raise ValueError("max_weight must be >= 1")
    weights = _weight_vectors(n, max_weight, dedupe, allow_zero)
    sums = weights @ cube_points(n).astype(np.int64).T
    keep = np.all(sums != 0, axis=1)
    weights, tables = weights[keep], np.sign(sums[keep]).astype(np.int8)
    _, first = np.unique(tables, axis=0, return_index=True)
    out, seen = [], set()
    for i in sorted(first):
        f = BooleanFunction(n, tables[i])
        if dedupe:
            f = canonical_form(f)
            if f in seen:
                continue
            seen.add(f)
        out.append((tuple(int(v) for v in weights[i]), f))
    return out


def enumerate_ltf(n: int, max_weight: int, dedupe: bool = False, allow_zero: bool = True):
    for _, f in ltf_candidates(n, max_weight, dedupe, allow_zero):
        yield f


class FamilyKind(enum.Enum):
    ODD_ALL = "odd"
    LTF_BOUNDED = "ltf"
    EXPLICIT_LIST = "list"


@dataclass(frozen=True)
class CandidateFamily:
    kind: FamilyKind
    n: int
    max_weight: int = 0
    dedupe: bool = False
    functions: tuple = ()

    def __post_init__(self):
        if self.kind is FamilyKind.ODD_ALL and self.n > ODD_ALL_MAX_DIM:
            raise ValueError(f"ODD_ALL is capped at n = {ODD_ALL_MAX_DIM}")
        if self.kind is FamilyKind.LTF_BOUNDED and self.max_weight < 1:
            raise ValueError("LTF_BOUNDED needs max_weight >= 1")
        if self.kind is FamilyKind.EXPLICIT_LIST and any(f.n != self.n for f in self.functions):
            raise ValueError("explicit functions must all have dimension n")

    @classmethod
    def odd(cls, n: int) -> CandidateFamily:
        return cls(FamilyKind.ODD_ALL, n)

    @classmethod
    def ltf(cls, n: int, max_weight: int, dedupe: bool = True) -> CandidateFamily:
        return cls(FamilyKind.LTF_BOUNDED, n, max_weight, dedupe)

    @classmethod
    def explicit(cls, functions: Sequence[BooleanFunction]) -> CandidateFamily:
        functions = tuple(functions)
        if not functions:
            raise ValueError("empty family")
        return cls(FamilyKind.EXPLICIT_LIST, functions[0].n, functions=functions)

    def descriptor(self) -> str:
        if self.kind is FamilyKind.ODD_ALL:
            return f"odd:n={self.n}"
        if self.kind is FamilyKind.LTF_BOUNDED:
            return f"ltf:n={self.n}:W={self.max_weight}:dedupe={int(self.dedupe)}"
        digest = hash(tuple(f.bits for f in self.functions)) & 0xFFFFFFFF
        return f"list:n={self.n}:count={len(self.functions)}:{digest:08x}"

    def tables(self) -> np.ndarray:
        if self.kind is FamilyKind.ODD_ALL:
            return odd_tables(self.n)
        if self.kind is FamilyKind.LTF_BOUNDED:
            fs = [f for _, f in ltf_candidates(self.n, self.max_weight, self.dedupe)]
        else:
            fs = list(self.functions)
        if not fs:
            return np.empty((0, 1 << self.n), dtype=np.int8)
        return np.stack([f.table for f in fs])

    def to_json(self) -> dict:
        return {
            "kind": self.kind.name,
            "n": self.n,
            "max_weight": self.max_weight,
            "dedupe": self.dedupe,
        }


@lru_cache(maxsize=4)
def odd_profiles(n: int) -> np.ndarray:
    """Absolute erasure profiles of every odd function on n bits, row-aligned with :func:`odd_tables`."""
    abs_p, _ = _kernels.profiles(odd_tables(n), n)
    abs_p.setflags(write=False)
    return abs_p


# ---------------------------------------------------------------------------
# scoring

def exact_scores(profiles: np.ndarray, n: int, p: Fraction) -> list:
    """Exact Phi_p for each profile row; identical rows are scored once."""
    uniq, inverse = np.unique(profiles, axis=0, return_inverse=True)
    values = [profile_value(row, n, p) for row in uniq]
    return [values[i] for i in np.asarray(inverse).reshape(-1)]


def float_scores(profiles: np.ndarray, n: int, p: float) -> np.ndarray:
    k = np.arange(n + 1)
    w = p**k * (1 - p) ** (n - k) / 2.0**n
    return profiles.astype(np.float64) @ w


def _score_chunk(args):
    lo, tables, n, p, prefilter = args
    profiles, _ = _kernels.profiles(tables, n)
    if prefilter:
        approx = float_scores(profiles, n, float(p))
        keep = np.nonzero(approx >= approx.max() - PREFILTER_RADIUS)[0]
    else:
        keep = np.arange(tables.shape[0])
    values = exact_scores(profiles[keep], n, p)
    best = max(values)
    ties = [int(lo + keep[i]) for i, v in enumerate(values) if v == best]
    return lo, best, ties, int(tables.shape[0]), int(keep.shape[0])


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get("NICD_WORKERS", "1")))
    except ValueError:
        return 1


@dataclass
class SearchReport:
    family: CandidateFamily
    p: Fraction
    best_value: Fraction
    argmax: list  # canonical forms, sorted by encoding
    argmax_raw_count: int
    majority_value: Fraction | None
    majority_in_argmax: bool | None
    candidates_scanned: int
    exactly_scored: int
    wall_time: float
    prefilter: bool
    backend: str = field(default_factory=_kernels.backend)
    witnesses: dict = field(default_factory=dict)

    @property
    def margin_over_majority(self) -> Fraction | None:
        return None if self.majority_value is None else self.best_value - self.majority_value

    def to_json(self, timing: bool = True) -> dict:
        out = {
            "family": self.family.to_json(),
            "p": rational_to_json(self.p),
            "best_value": rational_to_json(self.best_value),
            "best_decimal": significant_decimal(self.best_value, 30),
            "argmax": [render_function(f) for f in self.argmax],
            "argmax_raw_count": self.argmax_raw_count,
            "witness_weights": {render_function(f): list(w) for f, w in self.witnesses.items()},
            "majority_value": None if self.majority_value is None else rational_to_json(self.majority_value),
            "margin_over_majority": None
            if self.majority_value is None
            else rational_to_json(self.margin_over_majority),
            "majority_in_argmax": self.majority_in_argmax,
            "candidates_scanned": self.candidates_scanned,
            "exactly_scored": self.exactly_scored,
            "prefilter": self.prefilter,
        }
        if timing:
            out["wall_time"] = round(self.wall_time, 3)
            out["backend"] = self.backend
        return out


class _Checkpoint:
    """Per-range partial results in a JSON file, keyed by family descriptor and p."""

    def __init__(self, path, key: str):
        self.path = Path(path)
        self.key = key
        self.done: dict = {}
        if self.path.exists():
            data = json.loads(self.path.read_text())
            if data.get("key") == key:
                self.done = data.get("ranges", {})

    def get(self, lo: int):
        item = self.done.get(str(lo))
        if item is None:
            return None
        best = Fraction(int(item["best"]["num"]), int(item["best"]["den"]))
        return lo, best, item["ties"], item["size"], item["scored"]

    def put(self, result) -> None:
        lo, best, ties, size, scored = result
        self.done[str(lo)] = {"best": rational_to_json(best), "ties": ties, "size": size, "scored": scored}
        tmp = self.path.with_suffix(self.path.suffix + ".tmp")
        tmp.write_text(json.dumps({"key": self.key, "ranges": self.done}, sort_keys=True))
        tmp.replace(self.path)


def argmax_phi(
    family: CandidateFamily,
    p: RationalLike,
    prefilter: bool = False,
    workers: int | None = None,
    progress=None,
    checkpoint=None,
    chunk: int = CHUNK,
) -> SearchReport:
    """Exact maximum of Phi_p over ``family`` and all maximisers, up to symmetry.

    ``progress`` is a writable text stream receiving one JSON line per chunk;
    ``checkpoint`` is a path where finished ranges are recorded so an
    interrupted scan resumes where it stopped.
    """
    p = as_rational(p)
    if not 0 < p < 1:
        raise ValueError(f"p = {p} outside (0, 1)")
    start = time.perf_counter()
    n = family.n
    tables = family.tables()
    total = tables.shape[0]
    if total == 0:
        raise ValueError(f"family {family.descriptor()} is empty")
    workers = _default_workers() if workers is None else max(1, workers)
    ckpt = _Checkpoint(checkpoint, f"{family.descriptor()}|p={p}|prefilter={int(prefilter)}") if checkpoint else None

    jobs, results = [], {}
    for lo in range(0, total, chunk):
        cached = ckpt.get(lo) if ckpt else None
        if cached is not None:
            results[lo] = cached
        else:
            jobs.append((lo, tables[lo:lo + chunk], n, p, prefilter))

    def record(res):
        results[res[0]] = res
        if ckpt:
            ckpt.put(res)
        if progress is not None:
            done = sum(r[3] for r in results.values())
            progress.write(json.dumps({"done": done, "total": total, "range_start": res[0]}) + "\n")
            progress.flush()

    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for res in pool.map(_score_chunk, jobs):
                record(res)
    else:
        for job in jobs:
            record(_score_chunk(job))

    # merge in ascending range order
    best, ties, scored = None, [], 0
    for lo in sorted(results):
        _, local_best, local_ties, _, local_scored = results[lo]
        scored += local_scored
        if best is None or local_best > best:
            best, ties = local_best, list(local_ties)
        elif local_best == best:
            ties.extend(local_ties)

    classes = sorted({canonical_form(BooleanFunction(n, tables[i])) for i in ties}, key=lambda f: f.bits)
    maj_value = maj_in = None
    if n % 2 == 1:
        maj = majority(n)
        maj_value = poly_eval(phi_poly(maj), p)
        maj_in = canonical_form(maj) in classes
    witnesses = {}
    if family.kind is FamilyKind.LTF_BOUNDED:
        weights = {f: w for w, f in ltf_candidates(n, family.max_weight, dedupe=True)}
        witnesses = {f: weights[f] for f in classes if f in weights}
    return SearchReport(
        family=family,
        p=p,
        best_value=best,
        argmax=classes,
        argmax_raw_count=len(ties),
        majority_value=maj_value,
        majority_in_argmax=maj_in,
        candidates_scanned=total,
        exactly_scored=scored,
        wall_time=time.perf_counter() - start,
        prefilter=prefilter,
        witnesses=witnesses,
    )


# ---------------------------------------------------------------------------
# crossover scan

@dataclass
class CrossoverScan:
    points: list  # (p, difference, Ordering)
    segments: list  # ((p_lo, p_hi), Ordering) maximal runs of equal ordering
    brackets: list  # (p_left, p_right) grid intervals where the strict sign flips

    def to_json(self) -> dict:
        return {
            "points": [
                {"p": rational_to_json(p), "diff": rational_to_json(d), "ordering": o.name}
                for p, d, o in self.points
            ],
            "segments": [
                {"from": rational_to_json(a), "to": rational_to_json(b), "ordering": o.name}
                for (a, b), o in self.segments
            ],
            "brackets": [[rational_to_json(a), rational_to_json(b)] for a, b in self.brackets],
        }


def crossover_scan(f: BooleanFunction, g: BooleanFunction, grid) -> CrossoverScan:
    """Sign of ``Phi_p(f) - Phi_p(g)`` along a rational grid.

    ``grid`` is a step (the grid is then ``0, step, ..., 1``) or an explicit
    sequence of rationals.
    """
    if f.n != g.n:
        raise ValueError(f"dimension mismatch: {f.n} vs {g.n}")
    if isinstance(grid, (list, tuple)):
        ps = [as_rational(v) for v in grid]
    else:
        step = as_rational(grid)
        if step <= 0:
            raise ValueError("grid step must be positive")
        ps, x = [], Fraction(0)
        while x <= 1:
            ps.append(x)
            x += step
    diff = phi_poly(f) - phi_poly(g)
    points = []
    for p in ps:
        d = poly_eval(diff, p)
        points.append((p, d, Ordering.GREATER if d > 0 else Ordering.LESS if d < 0 else Ordering.EQUAL))
    segments = []
    for p, _, o in points:
        if segments and segments[-1][1] is o:
            segments[-1] = ((segments[-1][0][0], p), o)
        else:
            segments.append(((p, p), o))
    brackets = []
    last = None
    for p, _, o in points:
        if o is Ordering.EQUAL:
            continue
        if last is not None and last[1] is not o:
            brackets.append((last[0], p))
        last = (p, o)
    return CrossoverScan(points, segments, brackets)
