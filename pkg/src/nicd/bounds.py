"""Exact verification of the small-p theory around majority.

* the first-order approximation ``|Phi_p(f) - p sum_i |fhat(i)|| <= C_n p^2``
  with ``C_n = (n-1) sqrt(n) + C(n, 2)``;
* majority as the unique maximiser of the level-1 sum, with gap ``delta_n``;
* the radius ``p0(n) = min(delta_n / (4 C_n), 1)`` below which majority wins;
* dictators attaining the maximum for ``p >= 1/2``.

No verdict here touches floating point: ``sqrt(n)`` is either squared away or
replaced by a certified rational upper bound.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .boolfn import (
    BooleanFunction,
    canonical_form,
    cube_points,
    dictator,
    is_unbiased,
    majority,
    render_function,
)
from .erasure import level1_sum, level1_sum_abs, phi_at
from .exact import RationalLike, as_rational, isqrt_upper, rational_to_json
from .search import exact_scores, ltf_candidates, odd_profiles, odd_tables

SQRT_DENOMINATOR = 10**6


def _odd_dimension(n: int) -> None:
    if n < 1 or n % 2 == 0:
        raise ValueError(f"n must be a positive odd integer, got {n}")


def error_constant_upper(n: int) -> Fraction:
    """Rational ``>= (n-1) sqrt(n) + C(n,2)``, with sqrt(n) rounded up to 1e-6."""
    return (n - 1) * isqrt_upper(n, SQRT_DENOMINATOR) + comb(n, 2)


# ---------------------------------------------------------------------------
# first-order approximation bound

@dataclass(frozen=True)
class Lemma1Certificate:
    spec: str
    n: int
    p: Fraction
    phi: Fraction
    level1_abs: Fraction
    residual: Fraction
    bound_holds: bool

    @property
    def bound_upper(self) -> Fraction:
        """Rational over-estimate of ``C_n p^2``, for display only."""
        return error_constant_upper(self.n) * self.p**2

    def to_json(self) -> dict:
        return {
            "spec": self.spec,
            "p": rational_to_json(self.p),
            "phi": rational_to_json(self.phi),
            "level1_abs_sum": rational_to_json(self.level1_abs),
            "residual": rational_to_json(self.residual),
            "bound_upper": rational_to_json(self.bound_upper),
            "bound_holds": self.bound_holds,
        }


def first_order_bound_holds(residual: Fraction, n: int, p: Fraction) -> bool:
    """Decide ``residual <= ((n-1) sqrt(n) + C(n,2)) p^2`` exactly by squaring."""
    rest = residual - comb(n, 2) * p**2
    if rest <= 0:
        return True
    return rest * rest <= (n - 1) ** 2 * n * p**4


def lemma1_check(f: BooleanFunction, p: RationalLike, spec: str | None = None) -> Lemma1Certificate:
    p = as_rational(p)
    if not 0 < p < 1:
        raise ValueError(f"p = {p} outside (0, 1)")
    if not is_unbiased(f):
        raise ValueError("the first-order bound assumes an unbiased function")
    phi = phi_at(f, p)
    l1 = level1_sum_abs(f)
    residual = abs(phi - p * l1)
    return Lemma1Certificate(
        spec or render_function(f), f.n, p, phi, l1, residual, first_order_bound_holds(residual, f.n, p)
    )


# ---------------------------------------------------------------------------
# level-1 maximisation and the gap delta_n

@dataclass
class GapReport:
    n: int
    method: str
    max_level1: Fraction
    argmax_count: int
    argmax_is_majority: bool
    delta_n: Fraction
    runner_up: list = field(default_factory=list)  # specs
    runner_up_count: int = 0
    scanned: int = 0

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "method": self.method,
            "max_level1": rational_to_json(self.max_level1),
            "argmax_count": self.argmax_count,
            "argmax_is_majority": self.argmax_is_majority,
            "delta_n": rational_to_json(self.delta_n),
            "runner_up_count": self.runner_up_count,
            "runner_up": self.runner_up,
            "scanned": self.scanned,
        }


def _coordinate_sums(n: int) -> np.ndarray:
    return cube_points(n).astype(np.int64).sum(axis=1)


def _all_tables(n: int) -> np.ndarray:
    size = 1 << n
    j = np.arange(1 << size, dtype=np.int64)[:, None]
    return (1 - 2 * ((j >> np.arange(size)) & 1)).astype(np.int8)


def level1_full_scan(n: int) -> GapReport:
    """Level-1 sum of every one of the ``2**(2**n)`` Boolean functions (n <= 3)."""
    _odd_dimension(n)
    if n > 3:
        raise ValueError("full table scan is limited to n <= 3; use level1_gray_scan for n = 5")
    tables = _all_tables(n)
    sums = tables.astype(np.int64) @ _coordinate_sums(n)  # 2^n * level-1 sum
    top = sums.max()
    winners = np.nonzero(sums == top)[0]
    second = sums[sums < top].max()
    runners = np.nonzero(sums == second)[0]
    maj = majority(n)
    scale = 1 << n
    return GapReport(
        n=n,
        method="full",
        max_level1=Fraction(int(top), scale),
        argmax_count=int(winners.shape[0]),
        argmax_is_majority=winners.shape[0] == 1 and BooleanFunction(n, tables[winners[0]]) == maj,
        delta_n=Fraction(int(top - second), scale),
        runner_up=[render_function(BooleanFunction(n, tables[i])) for i in runners],
        runner_up_count=int(runners.shape[0]),
        scanned=int(tables.shape[0]),
    )


def level1_pointwise(n: int) -> GapReport:
    """Maximiser and gap from the pointwise argument.

    ``sum_i fhat(i) = 2^-n sum_x f(x) s(x)`` with ``s(x) = sum_i x_i``; the
    maximum takes ``f(x) = sgn(s(x))`` everywhere, and changing ``f`` at ``x``
    costs exactly ``2 |s(x)| / 2^n``.
    """
    _odd_dimension(n)
    s = _coordinate_sums(n)
    scale = 1 << n
    cheapest = int(np.abs(s).min())
    maj = majority(n)
    runners = []
    for x in np.nonzero(np.abs(s) == cheapest)[0]:
        table = maj.table.copy()
        table[x] = -table[x]
        runners.append(render_function(BooleanFunction(n, table)))
    return GapReport(
        n=n,
        method="pointwise",
        max_level1=Fraction(int(np.abs(s).sum()), scale),
        argmax_count=1 if cheapest > 0 else 0,
        argmax_is_majority=cheapest > 0,
        delta_n=Fraction(2 * cheapest, scale),
        runner_up=runners,
        runner_up_count=len(runners),
        scanned=1 << n,
    )


def level1_gray_scan(n: int) -> GapReport:
    """Brute force over all ``2**(2**n)`` functions (opt-in; n = 5 is 2^32 candidates)."""
    _odd_dimension(n)
    if n > 5:
        raise ValueError("Gray-code scan is limited to n <= 5")
    s = _coordinate_sums(n)
    best, count, second = _kernels.sign_sum_extremes(s)
    scale = 1 << n
    return GapReport(
        n=n,
        method="brute",
        max_level1=Fraction(int(best), scale),
        argmax_count=int(count),
        argmax_is_majority=int(count) == 1 and int(best) == int(np.abs(s).sum()),
        delta_n=Fraction(int(best - second), scale),
        scanned=1 << (1 << n),
    )


def level1_ltf_scan(n: int, max_weight: int) -> GapReport:
    """Level-1 sums over every distinct LTF with weights in ``{-W..W}^n``."""
    _odd_dimension(n)
    cands = ltf_candidates(n, max_weight, dedupe=False)
    values = [level1_sum(f) for _, f in cands]
    top = max(values)
    winners = [f for (_, f), v in zip(cands, values) if v == top]
    second = max(v for v in values if v < top)
    runners = [render_function(f) for (_, f), v in zip(cands, values) if v == second]
    return GapReport(
        n=n,
        method=f"ltf(W={max_weight})",
        max_level1=top,
        argmax_count=len(winners),
        argmax_is_majority=winners == [majority(n)],
        delta_n=top - second,
        runner_up=runners,
        runner_up_count=len(runners),
        scanned=len(cands),
    )


def level1_argmax_scan(n: int, strategy: str = "auto") -> GapReport:
    """``strategy``: ``full`` (n <= 3), ``pointwise``, ``gray`` (brute force, n <= 5) or ``auto``."""
    if strategy == "auto":
        strategy = "full" if n <= 3 else "pointwise"
    if strategy == "full":
        return level1_full_scan(n)
    if strategy == "pointwise":
        return level1_pointwise(n)
    if strategy == "gray":
        return level1_gray_scan(n)
    raise ValueError(f"unknown strategy {strategy!r}")


def gap_delta(n: int) -> Fraction:
    return level1_pointwise(n).delta_n


# ---------------------------------------------------------------------------
# small-p optimality radius

def p0_bound(n: int) -> Fraction:
    """Rational lower bound on ``min(delta_n / (4 C_n), 1)``."""
    _odd_dimension(n)
    c = error_constant_upper(n)
    if c == 0:
        return Fraction(1)
    return min(gap_delta(n) / (4 * c), Fraction(1))


def majority_flip_orbit(n: int) -> set:
    """Truth tables (as bit encodings) of ``Maj(s . x)`` for every sign vector ``s``."""
    maj = majority(n)
    idx = np.arange(1 << n)
    return {BooleanFunction(n, maj.table[idx ^ m]).bits for m in range(1 << n)}


@dataclass
class SmallPReport:
    n: int
    p0: Fraction
    samples: list
    compared: int
    orbit_size: int
    min_margin: dict  # p -> margin
    closest_rival: dict  # p -> spec
    violations: list

    @property
    def verified(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "p0_bound": rational_to_json(self.p0),
            "samples": [rational_to_json(p) for p in self.samples],
            "compared": self.compared,
            "majority_orbit_size": self.orbit_size,
            "min_margin": [rational_to_json(self.min_margin[p]) for p in self.samples],
            "closest_rival": [self.closest_rival[p] for p in self.samples],
            "violations": self.violations,
            "verified": self.verified,
        }


def verify_small_p_optimality(
    n: int, p_samples: Iterable[RationalLike], strict: bool = True
) -> SmallPReport:
    """Check ``Phi_p(Maj_n) > Phi_p(f)`` for every odd ``f`` outside majority's flip orbit.

    Functions in the orbit tie with majority exactly (Phi is flip invariant),
    which is also checked. With ``strict`` every sample must lie below
    :func:`p0_bound`; without it, samples anywhere in (0, 1) are checked as
    plain instances and failures are reported rather than guaranteed absent.
    """
    _odd_dimension(n)
    if n > 5:
        raise ValueError("exhaustive odd-function check is limited to n <= 5")
    p0 = p0_bound(n)
    samples = [as_rational(p) for p in p_samples]
    for p in samples:
        if not 0 < p < 1 or (strict and p >= p0):
            raise ValueError(f"sample p = {p} is not inside (0, p0) with p0 = {p0}")
    tables = odd_tables(n)
    profiles = odd_profiles(n)
    orbit = majority_flip_orbit(n)
    zero_one = ((1 - tables.astype(np.int64)) // 2)
    powers = [1 << x for x in range(1 << n)]
    encodings = [sum(b * w for b, w in zip(row, powers)) for row in zero_one.tolist()]
    in_orbit = np.array([e in orbit for e in encodings])
    maj_row = encodings.index(majority(n).bits)

    min_margin, rival, violations = {}, {}, []
    for p in samples:
        values = exact_scores(profiles, n, p)
        maj_value = values[maj_row]
        best_margin, best_idx = None, None
        for i, v in enumerate(values):
            if in_orbit[i]:
                if v != maj_value:
                    violations.append({"p": str(p), "spec": render_function(BooleanFunction(n, tables[i])), "reason": "orbit value differs"})
                continue
            margin = maj_value - v
            if margin <= 0:
                violations.append({"p": str(p), "spec": render_function(BooleanFunction(n, tables[i])), "margin": str(margin)})
            if best_margin is None or margin < best_margin:
                best_margin, best_idx = margin, i
        min_margin[p] = best_margin if best_margin is not None else Fraction(0)
        rival[p] = None if best_idx is None else render_function(BooleanFunction(n, tables[best_idx]))
    return SmallPReport(
        n=n,
        p0=p0,
        samples=samples,
        compared=int((~in_orbit).sum()),
        orbit_size=int(in_orbit.sum()),
        min_margin=min_margin,
        closest_rival=rival,
        violations=violations,
    )


# ---------------------------------------------------------------------------
# dictator regime

@dataclass
class DictatorReport:
    n: int
    p: Fraction
    max_phi: Fraction
    dictator_values: list
    argmax_classes: list  # canonical specs
    argmax_count: int

    @property
    def verified(self) -> bool:
        return self.max_phi == self.p and all(v == self.max_phi for v in self.dictator_values)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "p": rational_to_json(self.p),
            "max_phi": rational_to_json(self.max_phi),
            "dictator_values": [rational_to_json(v) for v in self.dictator_values],
            "argmax_classes": self.argmax_classes,
            "argmax_count": self.argmax_count,
            "verified": self.verified,
        }


def dictator_regime_check(n: int, p: RationalLike) -> DictatorReport:
    """Over all odd functions on n bits, the maximum of Phi_p for ``p >= 1/2``."""
    _odd_dimension(n)
    if n > 5:
        raise ValueError("exhaustive odd-function check is limited to n <= 5")
    p = as_rational(p)
    if not Fraction(1, 2) <= p < 1:
        raise ValueError(f"dictator regime needs p in [1/2, 1), got {p}")
    tables = odd_tables(n)
    values = exact_scores(odd_profiles(n), n, p)
    top = max(values)
    winners = [i for i, v in enumerate(values) if v == top]
    classes = sorted({canonical_form(BooleanFunction(n, tables[i])) for i in winners}, key=lambda f: f.bits)
    dicts = [phi_at(g, p) for i in range(1, n + 1) for g in (dictator(i, n), -dictator(i, n))]
    return DictatorReport(n, p, top, dicts, [render_function(f) for f in classes], len(winners))
