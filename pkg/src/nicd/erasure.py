"""Phi_p(f) = E|f(z)| and Stab_p(f) = E[f(z)^2] under the erasure model.

Each coordinate of ``z`` is +1 or -1 with probability ``p/2`` each and 0
with probability ``1-p``; ``f(z)`` is the multilinear extension.

Three independent routes are provided and cross-checked by the tests:

* :func:`phi_poly` expands the support/sign enumeration into a polynomial;
* :func:`phi_at` runs the same enumeration with numeric weights at fixed p;
* :func:`erasure_profile` uses subcube sums over the ternary lattice (the
  kernel behind exhaustive search).
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Sequence

import numpy as np

from . import _kernels
from .boolfn import BooleanFunction, FourierExpansion, is_unbiased, restriction_sums, wht
from .exact import (
    RationalLike,
    RationalPoly,
    as_rational,
    bernstein_basis,
    poly_eval,
    rational_to_json,
    significant_decimal,
)


class BiasedFunctionWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ErasureModel:
    n: int
    p: Fraction

    def __post_init__(self):
        p = as_rational(self.p)
        if not 0 < p < 1:
            raise ValueError(f"erasure rate must lie in (0, 1), got {p}")
        object.__setattr__(self, "p", p)

    def point_probability(self, support_size: int) -> Fraction:
        """Probability of one particular z with ``support_size`` nonzero coordinates."""
        k = support_size
        return (self.p / 2) ** k * (1 - self.p) ** (self.n - k)


def _check_p(p: RationalLike, closed: bool = True) -> Fraction:
    p = as_rational(p)
    ok = 0 <= p <= 1 if closed else 0 < p < 1
    if not ok:
        raise ValueError(f"p = {p} outside {'[0, 1]' if closed else '(0, 1)'}")
    return p


@lru_cache(maxsize=4096)
def fourier(f: BooleanFunction) -> FourierExpansion:
    return wht(f)


def _warn_biased(f: BooleanFunction) -> None:
    if not is_unbiased(f):
        warnings.warn(
            f"function has mean {f.mean()}; Phi_p is computed verbatim for biased input",
            BiasedFunctionWarning,
            stacklevel=3,
        )


def _restriction_abs_sums(f: BooleanFunction) -> list:
    """``acc[k] = sum over supports of size k of sum_sigma |2^n f(z)|``."""
    e = fourier(f)
    acc = [0] * (f.n + 1)
    for support in range(1 << f.n):
        g = restriction_sums(e, support)
        acc[bin(support).count("1")] += int(np.abs(g).sum())
    return acc


def support_terms(f: BooleanFunction) -> list:
    """``A_k`` with ``Phi_p(f) = sum_k A_k p^k (1-p)^(n-k)``.

    ``A_k / C(n, k)`` is ``E[|f(z)| | k coordinates survive]``.
    """
    acc = _restriction_abs_sums(f)
    n = f.n
    return [Fraction(acc[k], 1 << (n + k)) for k in range(n + 1)]


def conditional_means(f: BooleanFunction) -> list:
    """``E[|f(z)| | K = k]`` for ``k = 0..n``."""
    return [a / comb(f.n, k) for k, a in enumerate(support_terms(f))]


def phi_poly(f: BooleanFunction) -> RationalPoly:
    """Phi_p(f) as an exact polynomial in p of degree at most n."""
    _warn_biased(f)
    out = RationalPoly()
    for k, a in enumerate(support_terms(f)):
        if a:
            out = out + bernstein_basis(f.n, k).scale(a)
    return out


def phi_at(f: BooleanFunction, p: RationalLike) -> Fraction:
    """Phi_p(f) at a fixed rational p by probability-weighted enumeration."""
    p = _check_p(p)
    _warn_biased(f)
    e = fourier(f)
    n = f.n
    scale = 1 << n
    total = Fraction(0)
    for support in range(1 << n):
        k = bin(support).count("1")
        weight = (p / 2) ** k * (1 - p) ** (n - k)
        if weight == 0:
            continue
        g = restriction_sums(e, support)
        total += weight * Fraction(int(np.abs(g).sum()), scale)
    return total


def stab_poly(f: BooleanFunction) -> RationalPoly:
    """``sum_k p^k sum_{|S|=k} fhat(S)^2``."""
    return RationalPoly(fourier(f).level_weights())


def stab_via_erasure(f: BooleanFunction, p: RationalLike) -> Fraction:
    """E[f(z)^2] by support-and-sign enumeration, independent of :func:`stab_poly`."""
    p = _check_p(p)
    e = fourier(f)
    n = f.n
    scale2 = 1 << (2 * n)
    total = Fraction(0)
    for support in range(1 << n):
        k = bin(support).count("1")
        weight = (p / 2) ** k * (1 - p) ** (n - k)
        if weight == 0:
            continue
        g = restriction_sums(e, support)
        total += weight * Fraction(int((g * g).sum()), scale2)
    return total


def level1_coefficients(f: BooleanFunction) -> list:
    e = fourier(f)
    return [e.coeffs[1 << i] for i in range(f.n)]


def level1_sum(f: BooleanFunction) -> Fraction:
    return sum(level1_coefficients(f), Fraction(0))


def level1_sum_abs(f: BooleanFunction) -> Fraction:
    return sum((abs(c) for c in level1_coefficients(f)), Fraction(0))


# ---------------------------------------------------------------------------
# profile route (subcube sums), shared with the search engine

def erasure_profile(f: BooleanFunction) -> tuple:
    """Integer ``(abs_profile, sq_profile)`` of length ``n+1``; see :func:`phi_poly_from_profile`."""
    abs_p, sq_p = _kernels.profiles(f.table[None, :], f.n)
    return tuple(int(v) for v in abs_p[0]), tuple(int(v) for v in sq_p[0])


def phi_poly_from_profile(abs_profile: Sequence[int], n: int) -> RationalPoly:
    """``Phi_p = 2^-n sum_k B_k p^k (1-p)^(n-k)``."""
    out = RationalPoly()
    for k, b in enumerate(abs_profile):
        if b:
            out = out + bernstein_basis(n, k).scale(Fraction(int(b), 1 << n))
    return out


def stab_poly_from_profile(sq_profile: Sequence[int], n: int) -> RationalPoly:
    out = RationalPoly()
    for k, q in enumerate(sq_profile):
        if q:
            out = out + bernstein_basis(n, k).scale(Fraction(int(q), 1 << (2 * n - k)))
    return out


def profile_value(abs_profile: Sequence[int], n: int, p: Fraction) -> Fraction:
    """Exact Phi_p from an integer profile."""
    a, b = p.numerator, p.denominator
    total = 0
    for k, count in enumerate(abs_profile):
        if count:
            total += int(count) * a**k * (b - a) ** (n - k)
    return Fraction(total, (1 << n) * b**n)


# ---------------------------------------------------------------------------
# comparisons and reports

class Ordering(enum.Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def compare_phi(f: BooleanFunction, g: BooleanFunction, p: RationalLike):
    """``(ordering, margin)`` with margin ``Phi_p(f) - Phi_p(g)``."""
    if f.n != g.n:
        raise ValueError(f"dimension mismatch: {f.n} vs {g.n}")
    p = _check_p(p)
    margin = phi_at(f, p) - phi_at(g, p)
    order = Ordering.GREATER if margin > 0 else Ordering.LESS if margin < 0 else Ordering.EQUAL
    return order, margin


@dataclass(frozen=True)
class PhiReport:
    spec: str
    phi_poly: RationalPoly
    p: Fraction | None = None
    value_at_p: Fraction | None = None

    @property
    def decimal(self) -> str | None:
        return None if self.value_at_p is None else significant_decimal(self.value_at_p, 30)

    def to_json(self) -> dict:
        out = {"spec": self.spec, "phi_poly": self.phi_poly.to_json()}
        if self.p is not None:
            out["p"] = rational_to_json(self.p)
            out["phi_at_p"] = rational_to_json(self.value_at_p)
            out["decimal"] = self.decimal
        return out


def phi_report(f: BooleanFunction, spec: str, p: RationalLike | None = None) -> PhiReport:
    poly = phi_poly(f)
    if p is None:
        return PhiReport(spec, poly)
    p = _check_p(p)
    value = phi_at(f, p)
    if value != poly_eval(poly, p):
        raise AssertionError("polynomial and direct evaluation of Phi_p disagree")
    return PhiReport(spec, poly, p, value)


def rational_grid(start: RationalLike, stop: RationalLike, step: RationalLike) -> list:
    """Inclusive grid ``start, start+step, ..., <= stop``."""
    start, stop, step = as_rational(start), as_rational(stop), as_rational(step)
    if step <= 0:
        raise ValueError("grid step must be positive")
    out, x = [], start
    while x <= stop:
        out.append(x)
        x += step
    return out


def parse_grid(text: str) -> list:
    """``"start:stop:step"`` with exact rationals, e.g. ``"0:1:1/100"``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must be 'start:stop:step', got {text!r}")
    return rational_grid(*parts)


def curve(functions: Sequence[BooleanFunction], grid: Sequence[Fraction]) -> list:
    """Rows ``(p, [Phi_p(f) ...], [Stab_p(f) ...])`` via the exact polynomials."""
    polys = [(phi_poly(f), stab_poly(f)) for f in functions]
    return [
        (p, [poly_eval(a, p) for a, _ in polys], [poly_eval(b, p) for _, b in polys])
        for p in grid
    ]
