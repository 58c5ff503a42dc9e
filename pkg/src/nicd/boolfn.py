"""Boolean functions on {-1,1}^n as truth tables, their Fourier expansions,
linear threshold functions and the hypercube symmetry group.

Point encoding: bit ``i`` of an index holds coordinate ``x_{i+1}``; a set bit
means ``-1``. Negating ``x`` is index complementation. Subsets ``S`` of
``{1..n}`` are bitmasks with bit ``i`` standing for element ``i+1``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .exact import RationalLike, as_rational

MAX_DIM = 24
CANONICAL_MAX_DIM = 8


class TieError(ValueError):
    """An LTF weight vector whose linear form vanishes at some cube point."""

    def __init__(self, weights, point):
        self.weights = tuple(weights)
        self.point = tuple(point)
        super().__init__(
            f"weights {self.weights} give sum 0 at x = {self.point}; "
            "sgn(0) is not allowed"
        )


class SpecError(ValueError):
    """Malformed function specification string."""

    def __init__(self, text: str, position: int, message: str):
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position} in {text!r}")


def cube_points(n: int) -> np.ndarray:
    """``(2**n, n)`` array of +-1 coordinates, row ``x`` is the point with index ``x``."""
    idx = np.arange(1 << n, dtype=np.int64)[:, None]
    bits = (idx >> np.arange(n, dtype=np.int64)) & 1
    return (1 - 2 * bits).astype(np.int8)


def popcounts(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    return ((idx[:, None] >> np.arange(max(n, 1))) & 1).sum(axis=1)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BooleanFunction:
    """``f: {-1,1}^n -> {-1,1}`` stored as ``2**n`` signs."""

    n: int
    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not 0 <= self.n <= MAX_DIM:
            raise ValueError(f"dimension must be in [0, {MAX_DIM}], got {self.n}")
        table = np.asarray(self.table)
        if table.shape != (1 << self.n,):
            raise ValueError(f"table must have {1 << self.n} entries, got shape {table.shape}")
        if not np.all((table == 1) | (table == -1)):
            bad = int(np.nonzero((table != 1) & (table != -1))[0][0])
            raise ValueError(f"table entry at index {bad} is {table[bad]}, expected +1 or -1")
        object.__setattr__(self, "table", _frozen(table.astype(np.int8)))

    @classmethod
    def from_bits(cls, n: int, bits: int) -> BooleanFunction:
        """Inverse of :attr:`bits`: bit ``x`` set means ``f(x) = -1``."""
        size = 1 << n
        if bits < 0 or bits >> size:
            raise ValueError(f"bits do not fit a table of {size} entries")
        raw = np.frombuffer(bits.to_bytes((size + 7) // 8, "little"), dtype=np.uint8)
        raw = np.unpackbits(raw, bitorder="little")[:size].astype(np.int8)
        return cls(n, 1 - 2 * raw)

    @classmethod
    def from_callable(cls, n: int, fn) -> BooleanFunction:
        return cls(n, np.array([fn(tuple(int(v) for v in row)) for row in cube_points(n)]))

    @property
    def bits(self) -> int:
        packed = np.packbits((self.table == -1).astype(np.uint8), bitorder="little")
        return int.from_bytes(packed.tobytes(), "little")

    @property
    def zero_one(self) -> np.ndarray:
        return ((1 - self.table.astype(np.int64)) // 2)

    def __call__(self, x: Sequence[int]) -> int:
        if len(x) != self.n:
            raise ValueError(f"expected {self.n} coordinates, got {len(x)}")
        idx = 0
        for i, v in enumerate(x):
            if v not in (1, -1):
                raise ValueError(f"coordinate {i + 1} is {v}, expected +1 or -1")
            if v == -1:
                idx |= 1 << i
        return int(self.table[idx])

    def __neg__(self) -> BooleanFunction:
        return BooleanFunction(self.n, -self.table)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BooleanFunction):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.table, other.table)

    def __hash__(self) -> int:
        return hash((self.n, self.table.tobytes()))

    def __repr__(self) -> str:
        return f"BooleanFunction({render_function(self)!r})"

    def mean(self) -> Fraction:
        return Fraction(int(self.table.astype(np.int64).sum()), 1 << self.n)


# ---------------------------------------------------------------------------
# linear threshold functions

@dataclass(frozen=True)
class LtfSpec:
    """Integer weights of ``sgn(sum_i w_i x_i)``; ties are rejected on construction."""

    weights: tuple

    def __post_init__(self):
        w = tuple(int(v) for v in self.weights)
        if not w:
            raise ValueError("an LTF needs at least one weight")
        object.__setattr__(self, "weights", w)
        sums = cube_points(len(w)).astype(np.int64) @ np.array(w, dtype=np.int64)
        zero = np.nonzero(sums == 0)[0]
        if zero.shape[0]:
            raise TieError(w, cube_points(len(w))[zero[0]].tolist())

    @property
    def n(self) -> int:
        return len(self.weights)


def is_no_tie(weights: Sequence[int]) -> bool:
    sums = cube_points(len(weights)).astype(np.int64) @ np.asarray(weights, dtype=np.int64)
    return bool(np.all(sums != 0))


def from_ltf(spec: LtfSpec | Sequence[int]) -> BooleanFunction:
    if not isinstance(spec, LtfSpec):
        spec = LtfSpec(tuple(spec))
    sums = cube_points(spec.n).astype(np.int64) @ np.array(spec.weights, dtype=np.int64)
    return BooleanFunction(spec.n, np.sign(sums))


def majority(n: int) -> BooleanFunction:
    if n < 1 or n % 2 == 0:
        raise ValueError(f"majority needs an odd dimension, got {n}")
    return from_ltf([1] * n)


def dictator(i: int, n: int) -> BooleanFunction:
    """The function ``x_i`` (1-based)."""
    if not 1 <= i <= n:
        raise ValueError(f"dictator index {i} out of range 1..{n}")
    return BooleanFunction(n, cube_points(n)[:, i - 1])


def parity(n: int, subset: Iterable[int] | None = None) -> BooleanFunction:
    cols = [i - 1 for i in subset] if subset is not None else list(range(n))
    pts = cube_points(n).astype(np.int64)
    return BooleanFunction(n, np.prod(pts[:, cols], axis=1) if cols else np.ones(1 << n))


def constant(n: int, value: int = 1) -> BooleanFunction:
    return BooleanFunction(n, np.full(1 << n, value))


def is_odd(f: BooleanFunction) -> bool:
    return bool(np.all(f.table == -f.table[::-1]))


def is_unbiased(f: BooleanFunction) -> bool:
    return int(f.table.astype(np.int64).sum()) == 0


# ---------------------------------------------------------------------------
# Fourier expansion

def _to_mask(subset) -> int:
    if isinstance(subset, int):
        return subset
    mask = 0
    for i in subset:
        mask |= 1 << (int(i) - 1)
    return mask


def mask_to_subset(mask: int) -> tuple:
    return tuple(i + 1 for i in range(mask.bit_length()) if mask >> i & 1)


@dataclass(frozen=True)
class FourierExpansion:
    """Dense table of coefficients ``fhat[S]`` indexed by subset bitmask."""

    n: int
    coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(as_rational(c) for c in self.coeffs)
        if len(coeffs) != 1 << self.n:
            raise ValueError(f"expected {1 << self.n} coefficients, got {len(coeffs)}")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_terms(cls, n: int, terms: Mapping) -> FourierExpansion:
        """Build from ``{subset: coefficient}`` where a subset is a bitmask or 1-based indices."""
        coeffs = [Fraction(0)] * (1 << n)
        for subset, c in terms.items():
            coeffs[_to_mask(subset)] += as_rational(c)
        return cls(n, tuple(coeffs))

    def __getitem__(self, subset) -> Fraction:
        return self.coeffs[_to_mask(subset)]

    def level(self, k: int) -> dict:
        """Coefficients on sets of size ``k`` as ``{subset tuple: value}``."""
        return {
            mask_to_subset(m): c for m, c in enumerate(self.coeffs) if bin(m).count("1") == k
        }

    def levels(self) -> dict:
        """``{k: sorted list of nonzero coefficients of size-k sets}``."""
        out: dict = {}
        for m, c in enumerate(self.coeffs):
            if c != 0:
                out.setdefault(bin(m).count("1"), []).append(c)
        return {k: sorted(v) for k, v in sorted(out.items())}

    def level_weights(self) -> list:
        """``W[k] = sum_{|S|=k} fhat(S)**2``."""
        w = [Fraction(0)] * (self.n + 1)
        for m, c in enumerate(self.coeffs):
            w[bin(m).count("1")] += c * c
        return w

    def parseval(self) -> Fraction:
        return sum((c * c for c in self.coeffs), Fraction(0))

    def common_denominator(self) -> int:
        from math import lcm

        return lcm(*(c.denominator for c in self.coeffs)) if self.coeffs else 1

    def numerators(self, scale: int | None = None) -> np.ndarray:
        """Integer coefficients times ``scale`` (default ``2**n``)."""
        scale = 1 << self.n if scale is None else scale
        vals = [c * scale for c in self.coeffs]
        if any(v.denominator != 1 for v in vals):
            raise ValueError(f"coefficients are not multiples of 1/{scale}")
        return np.array([int(v) for v in vals], dtype=np.int64)

    def as_floats(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs], dtype=np.float64)

    def terms(self) -> dict:
        return {mask_to_subset(m): c for m, c in enumerate(self.coeffs) if c != 0}


def wht(f: BooleanFunction) -> FourierExpansion:
    """Fourier coefficients via the integer fast transform, divided by ``2**n`` at the end."""
    raw = _kernels.fwht(f.table.astype(np.int64))
    size = 1 << f.n
    return FourierExpansion(f.n, tuple(Fraction(int(v), size) for v in raw))


def wht_definition(f: BooleanFunction) -> FourierExpansion:
    """Fourier coefficients straight from ``E[f(x) prod_{i in S} x_i]``; O(4**n)."""
    pts = cube_points(f.n).astype(np.int64)
    table = f.table.astype(np.int64)
    coeffs = []
    for mask in range(1 << f.n):
        chi = np.ones(1 << f.n, dtype=np.int64)
        for i in range(f.n):
            if mask >> i & 1:
                chi = chi * pts[:, i]
        coeffs.append(Fraction(int((table * chi).sum()), 1 << f.n))
    return FourierExpansion(f.n, tuple(coeffs))


def cube_values(e: FourierExpansion) -> list:
    """Exact values of the expansion at every cube point."""
    den = e.common_denominator()
    nums = e.numerators(den)
    vals = _kernels.fwht(nums)
    return [Fraction(int(v), den) for v in vals]


def inverse_wht(e: FourierExpansion) -> BooleanFunction:
    vals = cube_values(e)
    for x, v in enumerate(vals):
        if v not in (1, -1):
            point = tuple(int(c) for c in cube_points(e.n)[x])
            raise ValueError(f"expansion takes value {v} at x = {point}; not Boolean")
    return BooleanFunction(e.n, np.array([int(v) for v in vals], dtype=np.int8))


def eval_extension(e: FourierExpansion, z: Sequence[RationalLike]) -> Fraction:
    """Exact multilinear extension ``sum_S fhat(S) prod_{i in S} z_i`` on ``[-1,1]^n``."""
    if len(z) != e.n:
        raise ValueError(f"expected {e.n} coordinates, got {len(z)}")
    zs = [as_rational(v) for v in z]
    for i, v in enumerate(zs):
        if abs(v) > 1:
            raise ValueError(f"coordinate z_{i + 1} = {v} lies outside [-1, 1]")
    arr = list(e.coeffs)
    # contract the top coordinate each round: arr[S] + z_top * arr[S + top]
    for i in reversed(range(e.n)):
        half = 1 << i
        zi = zs[i]
        arr = [arr[s] + zi * arr[s + half] if zi else arr[s] for s in range(half)]
    return arr[0]


def restriction_sums(e: FourierExpansion, support: int) -> np.ndarray:
    """Integer values ``sum_{T subset S} 2**n fhat(T) sigma^T`` for each sign pattern on ``S``.

    Entry ``j`` corresponds to the signs whose ``k``-th bit (in increasing
    element order of ``S``) marks element ``k`` of ``S`` as ``-1``.
    """
    nums = e.numerators()
    elems = [i for i in range(e.n) if support >> i & 1]
    k = len(elems)
    sub = np.zeros(1 << k, dtype=np.int64)
    for j in range(1 << k):
        mask = 0
        for b, i in enumerate(elems):
            if j >> b & 1:
                mask |= 1 << i
        sub[j] = nums[mask]
    return _kernels.fwht(sub)


# ---------------------------------------------------------------------------
# symmetries

@dataclass(frozen=True)
class CubeSymmetry:
    """``(g . f)(x) = output_negation * f(y)`` with ``y_i = flips[i] * x[permutation[i]]``.

    ``permutation`` is 0-based.
    """

    permutation: tuple
    flips: tuple
    output_negation: int = 1

    def __post_init__(self):
        perm = tuple(int(v) for v in self.permutation)
        flips = tuple(int(v) for v in self.flips)
        if sorted(perm) != list(range(len(perm))):
            raise ValueError(f"{perm} is not a permutation of 0..{len(perm) - 1}")
        if len(flips) != len(perm) or any(s not in (1, -1) for s in flips):
            raise ValueError("flips must be a +-1 vector matching the permutation length")
        if self.output_negation not in (1, -1):
            raise ValueError("output_negation must be +1 or -1")
        object.__setattr__(self, "permutation", perm)
        object.__setattr__(self, "flips", flips)

    @property
    def n(self) -> int:
        return len(self.permutation)

    @classmethod
    def identity(cls, n: int) -> CubeSymmetry:
        return cls(tuple(range(n)), (1,) * n, 1)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, negation: bool = True) -> CubeSymmetry:
        perm = tuple(int(v) for v in rng.permutation(n))
        flips = tuple(int(v) for v in rng.choice([-1, 1], size=n))
        neg = int(rng.choice([-1, 1])) if negation else 1
        return cls(perm, flips, neg)

    def index_map(self) -> np.ndarray:
        """``m[x]`` is the index of ``y`` for the point with index ``x``."""
        x = np.arange(1 << self.n, dtype=np.int64)
        y = np.zeros_like(x)
        for i, (src, s) in enumerate(zip(self.permutation, self.flips)):
            bit = (x >> src) & 1
            if s == -1:
                bit ^= 1
            y |= bit << i
        return y


def compose(g: CubeSymmetry, h: CubeSymmetry) -> CubeSymmetry:
    """The symmetry ``k`` with ``apply_symmetry(f, k) == apply_symmetry(apply_symmetry(f, h), g)``."""
    if g.n != h.n:
        raise ValueError("dimension mismatch")
    perm = tuple(g.permutation[h.permutation[i]] for i in range(g.n))
    flips = tuple(h.flips[i] * g.flips[h.permutation[i]] for i in range(g.n))
    return CubeSymmetry(perm, flips, g.output_negation * h.output_negation)


def apply_symmetry(f: BooleanFunction, g: CubeSymmetry) -> BooleanFunction:
    if f.n != g.n:
        raise ValueError(f"symmetry acts on {g.n} bits, function has {f.n}")
    return BooleanFunction(f.n, g.output_negation * f.table[g.index_map()])


def canonical_form(f: BooleanFunction, include_negation: bool = False) -> BooleanFunction:
    """Orbit representative with the smallest :attr:`~BooleanFunction.bits` encoding.

    The group is coordinate permutations times input flips, optionally times
    output negation.
    """
    if f.n > CANONICAL_MAX_DIM:
        raise ValueError(
            f"canonical_form enumerates 2^n * n! symmetries and is capped at n = "
            f"{CANONICAL_MAX_DIM} (got n = {f.n}); dedupe by truth-table hash instead"
        )
    if f.n == 0:
        return f
    best = _kernels.orbit_min(f.zero_one, f.n, include_negation)
    return BooleanFunction(f.n, 1 - 2 * np.asarray(best, dtype=np.int8))


def level_abs_multisets(f: BooleanFunction) -> dict:
    """``{k: sorted |fhat(S)| for |S| = k}``; invariant under the symmetry group."""
    e = wht(f)
    return {k: sorted(abs(c) for c in e.level(k).values()) for k in range(f.n + 1)}


def binomial_level_sizes(n: int) -> list:
    return [comb(n, k) for k in range(n + 1)]


# ---------------------------------------------------------------------------
# spec grammar: ltf:w1,...,wn  maj:n  dict:i,n  table:<hex>[@n]

_INT = re.compile(r"\s*(-?\d+)\s*")


def _parse_ints(text: str, body: str, offset: int) -> list:
    out, pos = [], 0
    for piece in body.split(","):
        m = _INT.fullmatch(piece)
        if not m:
            raise SpecError(text, offset + pos, f"expected an integer, found {piece!r}")
        out.append(int(m.group(1)))
        pos += len(piece) + 1
    return out


def parse_function(text: str) -> BooleanFunction:
    """Parse ``ltf:1,-3,1,-1,3``, ``maj:5``, ``dict:1,5`` or ``table:<hex>``.

    ``table`` digits encode :attr:`BooleanFunction.bits` most significant
    first; ``n`` is inferred from the digit count (``2**n = 4 * digits``) or
    given explicitly with an ``@n`` suffix, which is required for ``n < 2``.
    """
    s = text.strip()
    kind, sep, body = s.partition(":")
    if not sep:
        raise SpecError(text, 0, "expected '<kind>:<args>'")
    offset = len(kind) + 1
    kind = kind.lower()
    if kind == "ltf":
        w = _parse_ints(text, body, offset)
        return from_ltf(w)
    if kind == "maj":
        (n,) = _expect(text, _parse_ints(text, body, offset), 1, offset)
        return majority(n)
    if kind in ("dict", "dictator"):
        i, n = _expect(text, _parse_ints(text, body, offset), 2, offset)
        return dictator(i, n)
    if kind == "table":
        hexpart, at, dim = body.partition("@")
        hexpart = hexpart.strip()
        if not hexpart or not re.fullmatch(r"[0-9a-fA-F]+", hexpart):
            raise SpecError(text, offset, f"expected hex digits, found {hexpart!r}")
        if at:
            (n,) = _expect(text, _parse_ints(text, dim, offset + len(hexpart) + 1), 1, offset)
            want = max(1, (1 << n) // 4)
            if len(hexpart) != want:
                raise SpecError(text, offset, f"table for n={n} needs {want} hex digits, got {len(hexpart)}")
        else:
            digits = len(hexpart)
            n = (4 * digits).bit_length() - 1
            if digits & (digits - 1) or n < 2:
                raise SpecError(text, offset, f"{digits} hex digits is not a table size; add '@n'")
        value = int(hexpart, 16)
        if value >> (1 << n):
            raise SpecError(text, offset, f"table value exceeds 2^{1 << n}")
        return BooleanFunction.from_bits(n, value)
    raise SpecError(text, 0, f"unknown function kind {kind!r}")


def _expect(text, values, count, offset):
    if len(values) != count:
        raise SpecError(text, offset, f"expected {count} integer(s), got {len(values)}")
    return values


def render_function(f: BooleanFunction) -> str:
    """``table:`` spec that :func:`parse_function` maps back to ``f`` exactly."""
    digits = max(1, (1 << f.n) // 4)
    body = format(f.bits, "x").rjust(digits, "0")
    return f"table:{body}" + (f"@{f.n}" if f.n < 2 else "")
