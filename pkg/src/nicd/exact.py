"""Exact rational numbers and univariate polynomials over them.

Rationals are :class:`fractions.Fraction`, which are always stored reduced
with the sign on the numerator. :class:`RationalPoly` is a small immutable
polynomial in the erasure rate ``p``.
"""
from __future__ import annotations

import decimal
from fractions import Fraction
from typing import Iterable, Sequence, Union

Rational = Fraction
RationalLike = Union[Fraction, int, str]


def rat(num: int, den: int = 1) -> Fraction:
    """Build a reduced rational ``num/den``.

    >>> rat(-4, 8)
    Fraction(-1, 2)
    """
    if den == 0:
        raise ZeroDivisionError(f"zero denominator in rat({num}, {den})")
    return Fraction(int(num), int(den))


def parse_rational(text: RationalLike) -> Fraction:
    """Parse ``"2/5"``, ``"0.40"``, ``"1e-3"`` or an int into an exact rational.

    Decimal strings are read exactly, so ``"0.40"`` becomes ``2/5``.
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        raise TypeError("floats are not accepted; pass a string such as '0.4'")
    s = str(text).strip()
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse {text!r} as an exact rational") from exc


def as_rational(x: RationalLike) -> Fraction:
    return parse_rational(x)


def rational_to_json(r: Fraction) -> dict:
    return {"num": str(r.numerator), "den": str(r.denominator)}


def rational_from_json(obj: dict) -> Fraction:
    return rat(int(obj["num"]), int(obj["den"]))


def is_terminating(r: Fraction) -> bool:
    d = r.denominator
    for q in (2, 5):
        while d % q == 0:
            d //= q
    return d == 1


def exact_decimal(r: Fraction) -> str:
    """Render a rational whose denominator is ``2**a * 5**b`` as an exact decimal."""
    if not is_terminating(r):
        raise ValueError(f"{r} has no terminating decimal expansion")
    exps = []
    for q in (2, 5):
        d, e = r.denominator, 0
        while d % q == 0:
            d //= q
            e += 1
        exps.append(e)
    places = max(exps)
    scaled = r * 10**places
    assert scaled.denominator == 1
    digits = str(abs(scaled.numerator)).rjust(places + 1, "0")
    sign = "-" if r < 0 else ""
    if places == 0:
        return sign + digits
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def significant_decimal(r: Fraction, digits: int = 30) -> str:
    """``r`` rounded to ``digits`` significant digits (half-even)."""
    ctx = decimal.Context(prec=digits, rounding=decimal.ROUND_HALF_EVEN)
    value = ctx.divide(decimal.Decimal(r.numerator), decimal.Decimal(r.denominator))
    return format(value, "f") if value.adjusted() > -7 else format(value, "e")


def render_decimal(r: Fraction, digits: int = 12) -> str:
    """Exact decimal when it terminates, else ``digits`` significant digits marked approx."""
    if is_terminating(r):
        return exact_decimal(r)
    return f"{significant_decimal(r, digits)} (approx)"


def _trim(coeffs: Iterable[RationalLike]) -> tuple:
    out = [as_rational(c) for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


class RationalPoly:
    """Univariate polynomial with exact rational coefficients, ascending degree.

    Trailing zeros are trimmed, so the zero polynomial has no coefficients
    and degree ``-1``.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Iterable[RationalLike] = ()):
        self._coeffs = _trim(coeffs)

    @classmethod
    def monomial(cls, degree: int, coeff: RationalLike = 1) -> RationalPoly:
        return cls([0] * degree + [coeff])

    @classmethod
    def one_minus_p(cls) -> RationalPoly:
        return cls([1, -1])

    @property
    def coeffs(self) -> tuple:
        return self._coeffs

    @property
    def degree(self) -> int:
        return len(self._coeffs) - 1

    def __len__(self) -> int:
        return len(self._coeffs)

    def __getitem__(self, k: int) -> Fraction:
        if k < 0:
            raise IndexError(k)
        return self._coeffs[k] if k < len(self._coeffs) else Fraction(0)

    def __iter__(self):
        return iter(self._coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, RationalPoly):
            return self._coeffs == other._coeffs
        if isinstance(other, (list, tuple)):
            return self._coeffs == _trim(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._coeffs)

    def __repr__(self) -> str:
        return f"RationalPoly([{', '.join(str(c) for c in self._coeffs)}])"

    def __str__(self) -> str:
        parts = []
        for k, c in enumerate(self._coeffs):
            if c == 0:
                continue
            mono = "" if k == 0 else ("p" if k == 1 else f"p^{k}")
            mag = abs(c)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            parts.append((c < 0, body))
        if not parts:
            return "0"
        out = ("-" if parts[0][0] else "") + parts[0][1]
        for neg, body in parts[1:]:
            out += (" - " if neg else " + ") + body
        return out

    def __add__(self, other) -> RationalPoly:
        other = _coerce(other)
        m = max(len(self), len(other))
        return RationalPoly(self[k] + other[k] for k in range(m))

    __radd__ = __add__

    def __neg__(self) -> RationalPoly:
        return RationalPoly(-c for c in self._coeffs)

    def __sub__(self, other) -> RationalPoly:
        return self + (-_coerce(other))

    def __rsub__(self, other) -> RationalPoly:
        return _coerce(other) - self

    def __mul__(self, other) -> RationalPoly:
        if not isinstance(other, RationalPoly):
            return self.scale(other)
        if not self._coeffs or not other._coeffs:
            return RationalPoly()
        out = [Fraction(0)] * (len(self) + len(other) - 1)
        for i, a in enumerate(self._coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other._coeffs):
                out[i + j] += a * b
        return RationalPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> RationalPoly:
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        out = RationalPoly([1])
        for _ in range(k):
            out = out * self
        return out

    def scale(self, c: RationalLike) -> RationalPoly:
        c = as_rational(c)
        return RationalPoly(c * a for a in self._coeffs)

    def __call__(self, x: RationalLike) -> Fraction:
        return poly_eval(self, x)

    def to_json(self) -> list:
        return [rational_to_json(c) for c in self._coeffs]

    @classmethod
    def from_json(cls, items: Sequence[dict]) -> RationalPoly:
        return cls(rational_from_json(o) for o in items)


def _coerce(x) -> RationalPoly:
    return x if isinstance(x, RationalPoly) else RationalPoly([as_rational(x)])


def poly_eval(poly: RationalPoly | Sequence[RationalLike], x: RationalLike) -> Fraction:
    """Exact Horner evaluation."""
    coeffs = poly.coeffs if isinstance(poly, RationalPoly) else _trim(poly)
    x = as_rational(x)
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def poly_add(a: RationalPoly, b: RationalPoly) -> RationalPoly:
    return a + b


def poly_mul(a: RationalPoly, b: RationalPoly) -> RationalPoly:
    return a * b


def poly_scale(a: RationalPoly, c: RationalLike) -> RationalPoly:
    return a.scale(c)


def bernstein_basis(n: int, k: int) -> RationalPoly:
    """``p**k * (1-p)**(n-k)`` expanded."""
    return RationalPoly.monomial(k) * RationalPoly.one_minus_p() ** (n - k)


def isqrt_upper(n: int, denominator: int = 10**6) -> Fraction:
    """Smallest ``m/denominator`` with ``(m/denominator)**2 >= n``."""
    from math import isqrt

    target = n * denominator * denominator
    m = isqrt(target)
    if m * m < target:
        m += 1
    return Fraction(m, denominator)


def fixed_decimal(r: Fraction, places: int = 12) -> str:
    """``r`` rounded half-even to ``places`` digits after the point, '.' separator."""
    scaled = r * 10**places
    rounded = round(scaled)  # Fraction.__round__ is exact, ties to even
    sign = "-" if rounded < 0 else ""
    digits = str(abs(rounded)).rjust(places + 1, "0")
    if places == 0:
        return sign + digits
    return f"{sign}{digits[:-places]}.{digits[-places:]}"
