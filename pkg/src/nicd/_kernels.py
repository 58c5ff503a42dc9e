"""Hot inner loops, each with a numba and a pure-numpy implementation.

The numba versions are used when numba imports and ``NICD_DISABLE_NUMBA`` is
unset (or ``0``). Both implementations are always importable as
``<name>_numba`` / ``<name>_numpy`` so they can be tested against each other;
the numba names fall back to the numpy ones when numba is unavailable.

Every kernel works on integers or floats only. Exactness is restored by the
callers, which convert integer profiles into rationals.
"""
from __future__ import annotations

import itertools
import os
from functools import lru_cache

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def _env_disabled() -> bool:
    return os.environ.get("NICD_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")


_use_numba = HAVE_NUMBA and not _env_disabled()


def backend() -> str:
    return "numba" if _use_numba else "numpy"


def set_backend(name: str) -> None:
    """Switch between ``"numba"`` and ``"numpy"`` at runtime."""
    global _use_numba
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _use_numba = name == "numba"


def _njit(fn):
    if HAVE_NUMBA:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn


# ---------------------------------------------------------------------------
# ternary lattice tables shared by the erasure kernels

@lru_cache(maxsize=None)
def ternary_tables(n: int):
    """Lookup tables for the 3**n points of {+1, -1, erased}**n.

    Digit ``i`` of a ternary index ``t`` describes coordinate ``i``: 0 is +1,
    1 is -1, 2 is erased. Returns ``(step, cube_index, support)`` where
    ``step[t]`` is ``3**i`` for the lowest erased digit ``i`` (0 if none),
    ``cube_index[t]`` is the hypercube index of an unerased point, and
    ``support[t]`` is the number of unerased coordinates.
    """
    size = 3**n
    digits = np.zeros((size, n), dtype=np.int64)
    t = np.arange(size)
    for i in range(n):
        digits[:, i] = (t // 3**i) % 3
    erased = digits == 2
    support = (n - erased.sum(axis=1)).astype(np.int64)
    step = np.zeros(size, dtype=np.int64)
    for i in reversed(range(n)):
        step = np.where(erased[:, i], 3**i, step)
    cube_index = np.zeros(size, dtype=np.int64)
    for i in range(n):
        cube_index |= np.where(digits[:, i] == 1, 1 << i, 0)
    for arr in (step, cube_index, support):
        arr.setflags(write=False)
    return step, cube_index, support


# ---------------------------------------------------------------------------
# integer Walsh-Hadamard transform over the last axis

def fwht_numpy(values: np.ndarray) -> np.ndarray:
    a = np.array(values, dtype=np.int64, copy=True)
    size = a.shape[-1]
    lead = a.shape[:-1]
    h = 1
    while h < size:
        a = a.reshape(*lead, size // (2 * h), 2, h)
        x = a[..., 0, :].copy()
        y = a[..., 1, :]
        a[..., 0, :] = x + y
        a[..., 1, :] = x - y
        a = a.reshape(*lead, size)
        h *= 2
    return a


@_njit
def _fwht_rows(a):
    rows, size = a.shape
    for r in range(rows):
        h = 1
        while h < size:
            for start in range(0, size, 2 * h):
                for j in range(start, start + h):
                    x = a[r, j]
                    y = a[r, j + h]
                    a[r, j] = x + y
                    a[r, j + h] = x - y
            h *= 2
    return a


def fwht_numba(values: np.ndarray) -> np.ndarray:
    a = np.array(values, dtype=np.int64, copy=True)
    shape = a.shape
    return _fwht_rows(a.reshape(-1, shape[-1])).reshape(shape)


def fwht(values: np.ndarray) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform, ``out[S] = sum_x v[x] (-1)^|S & x|``."""
    return fwht_numba(values) if _use_numba else fwht_numpy(values)


# ---------------------------------------------------------------------------
# erasure profiles: sums of |subcube sums| grouped by support size

def subcube_sums_numpy(tables: np.ndarray, n: int) -> np.ndarray:
    """Subcube sums ``V[row, t]`` for every ternary point ``t``.

    ``V[row, t]`` is the sum of ``tables[row, x]`` over hypercube points ``x``
    that agree with ``t`` on its unerased coordinates.
    """
    step, cube_index, _ = ternary_tables(n)
    tables = np.asarray(tables, dtype=np.int64).reshape(-1, 1 << n)
    out = np.empty((3**n, tables.shape[0]), dtype=np.int64)
    for t in range(3**n):
        s = step[t]
        if s == 0:
            out[t] = tables[:, cube_index[t]]
        else:
            out[t] = out[t - 2 * s] + out[t - s]
    return out.T


def profiles_numpy(tables: np.ndarray, n: int, chunk: int = 8192):
    """Per-row ``(abs_profile, sq_profile)``, each of shape ``(rows, n+1)``.

    ``abs_profile[r, k]`` sums ``|V|`` and ``sq_profile[r, k]`` sums ``V**2``
    over ternary points with ``k`` unerased coordinates.
    """
    _, _, support = ternary_tables(n)
    onehot = np.zeros((3**n, n + 1), dtype=np.int64)
    onehot[np.arange(3**n), support] = 1
    tables = np.asarray(tables).reshape(-1, 1 << n)
    abs_out = np.empty((tables.shape[0], n + 1), dtype=np.int64)
    sq_out = np.empty_like(abs_out)
    for lo in range(0, tables.shape[0], chunk):
        v = subcube_sums_numpy(tables[lo:lo + chunk], n)
        abs_out[lo:lo + chunk] = np.abs(v) @ onehot
        sq_out[lo:lo + chunk] = (v * v) @ onehot
    return abs_out, sq_out


@_njit
def _profiles_rows(tables, step, cube_index, support, n):
    rows = tables.shape[0]
    size = step.shape[0]
    abs_out = np.zeros((rows, n + 1), dtype=np.int64)
    sq_out = np.zeros((rows, n + 1), dtype=np.int64)
    v = np.empty(size, dtype=np.int64)
    for r in range(rows):
        for t in range(size):
            s = step[t]
            if s == 0:
                v[t] = tables[r, cube_index[t]]
            else:
                v[t] = v[t - 2 * s] + v[t - s]
            x = v[t]
            k = support[t]
            abs_out[r, k] += x if x >= 0 else -x
            sq_out[r, k] += x * x
    return abs_out, sq_out


def profiles_numba(tables: np.ndarray, n: int):
    step, cube_index, support = ternary_tables(n)
    tables = np.ascontiguousarray(np.asarray(tables).reshape(-1, 1 << n), dtype=np.int64)
    return _profiles_rows(tables, step, cube_index, support, n)


def profiles(tables: np.ndarray, n: int):
    return profiles_numba(tables, n) if _use_numba else profiles_numpy(tables, n)


# ---------------------------------------------------------------------------
# orbit minimum under coordinate permutations and flips

@lru_cache(maxsize=8)
def permutation_maps(n: int) -> np.ndarray:
    """``maps[j, x]``: index of ``x`` with coordinates relabelled by the j-th permutation.

    Bit ``i`` of ``maps[j, x]`` is bit ``perm[i]`` of ``x``.
    """
    x = np.arange(1 << n, dtype=np.int64)
    perms = list(itertools.permutations(range(n)))
    maps = np.zeros((len(perms), 1 << n), dtype=np.int32)
    for j, perm in enumerate(perms):
        for i, src in enumerate(perm):
            maps[j] |= (((x >> src) & 1) << i).astype(np.int32)
    maps.setflags(write=False)
    return maps


def orbit_min_numpy(bits: np.ndarray, maps: np.ndarray, negate: bool) -> np.ndarray:
    """Smallest encoding over the orbit; index ``2**n - 1`` is the most significant bit."""
    size = bits.shape[0]
    flips = np.arange(size, dtype=np.int64)
    if size <= 64:
        # whole orbit at once, encodings packed into uint64 keys
        cand = bits[maps[:, None, :] ^ flips[None, :, None]].reshape(-1, size)
        if negate:
            cand = np.concatenate([cand, 1 - cand])
        weights = np.left_shift(np.uint64(1), np.arange(size, dtype=np.uint64))
        keys = (cand.astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64)
        return cand[int(np.argmin(keys))].astype(np.int64)
    best = None
    for pmap in maps:
        cand = bits[pmap[None, :] ^ flips[:, None]]
        if negate:
            cand = np.concatenate([cand, 1 - cand])
        # lexicographic minimum reading columns from the top index down
        rows = np.arange(cand.shape[0])
        for col in range(size - 1, -1, -1):
            column = cand[rows, col]
            rows = rows[column == column.min()]
            if rows.shape[0] == 1:
                break
        winner = cand[rows[0]]
        if best is None or _less(winner, best):
            best = winner.copy()
    return best


def _less(a: np.ndarray, b: np.ndarray) -> bool:
    diff = np.nonzero(a != b)[0]
    return bool(diff.shape[0]) and bool(a[diff[-1]] < b[diff[-1]])


@_njit
def _orbit_min(bits, maps, negate):
    size = bits.shape[0]
    best = bits.copy()
    for j in range(maps.shape[0]):
        for m in range(size):
            for neg in range(2 if negate else 1):
                # compare candidate against best from the most significant index
                for x in range(size - 1, -1, -1):
                    c = bits[maps[j, x] ^ m] ^ neg
                    if c != best[x]:
                        if c < best[x]:
                            for y in range(size):
                                best[y] = bits[maps[j, y] ^ m] ^ neg
                        break
    return best


def orbit_min_numba(bits: np.ndarray, maps: np.ndarray, negate: bool) -> np.ndarray:
    return _orbit_min(np.ascontiguousarray(bits, dtype=np.int64), maps, negate)


def orbit_min(bits: np.ndarray, n: int, negate: bool = False) -> np.ndarray:
    """Orbit-minimal 0/1 truth table (1 means the value -1)."""
    maps = permutation_maps(n)
    bits = np.asarray(bits, dtype=np.int64)
    if _use_numba:
        return orbit_min_numba(bits, maps, negate)
    return orbit_min_numpy(bits, maps, negate)


# ---------------------------------------------------------------------------
# float evaluation of the multilinear extension at erasure samples

def extension_eval_numpy(coeffs: np.ndarray, z: np.ndarray, chunk: int = 1 << 16) -> np.ndarray:
    """Evaluate ``sum_S c[S] prod_{i in S} z_i`` for every row of ``z``."""
    z = np.asarray(z, dtype=np.float64)
    rows, n = z.shape
    coeffs = np.asarray(coeffs, dtype=np.float64)
    out = np.empty(rows, dtype=np.float64)
    for lo in range(0, rows, chunk):
        zc = z[lo:lo + chunk]
        chi = np.ones((zc.shape[0], 1 << n), dtype=np.float64)
        for i in range(n):
            half = 1 << i
            chi[:, half:2 * half] = chi[:, :half] * zc[:, i:i + 1]
        out[lo:lo + chunk] = chi @ coeffs
    return out


@_njit
def _extension_eval(coeffs, z):
    rows, n = z.shape
    out = np.empty(rows, dtype=np.float64)
    for r in range(rows):
        supp = 0
        neg = 0
        for i in range(n):
            if z[r, i] != 0:
                supp |= 1 << i
                if z[r, i] < 0:
                    neg |= 1 << i
        # visit every subset T of the support, including the empty set
        acc = 0.0
        t = supp
        while True:
            parity = 0
            u = t & neg
            while u:
                parity ^= 1
                u &= u - 1
            acc += -coeffs[t] if parity else coeffs[t]
            if t == 0:
                break
            t = (t - 1) & supp
        out[r] = acc
    return out


def extension_eval_numba(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    return _extension_eval(
        np.ascontiguousarray(coeffs, dtype=np.float64),
        np.ascontiguousarray(z, dtype=np.int8),
    )


def extension_eval(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    """``z`` must be {-1, 0, 1}-valued for the numba path."""
    return extension_eval_numba(coeffs, z) if _use_numba else extension_eval_numpy(coeffs, z)


# ---------------------------------------------------------------------------
# brute force over all sign patterns: extremes of sum_x f(x) s(x)

def sign_sum_extremes_numpy(s: np.ndarray, chunk: int = 256):
    """``(best, best_count, second_best)`` of ``sum_x e_x s_x`` over all ``e`` in {+-1}^len(s).

    Every pattern is enumerated: the index set is split in two halves whose
    partial sums are added for all combinations.
    """
    s = np.asarray(s, dtype=np.int64)
    size = s.shape[0]
    lo_n = size // 2
    hi_n = size - lo_n

    def partial(vals, m):
        j = np.arange(1 << m, dtype=np.int64)[:, None]
        signs = 1 - 2 * ((j >> np.arange(m)) & 1)
        return signs @ vals

    low = partial(s[:lo_n], lo_n)
    high = partial(s[lo_n:], hi_n)
    best, count, second = None, 0, None
    for start in range(0, high.shape[0], chunk):
        block = (high[start:start + chunk, None] + low[None, :]).ravel()
        top = int(block.max())
        top_count = int((block == top).sum())
        below = block[block < top]
        runner = int(below.max()) if below.shape[0] else None
        if best is None or top > best:
            runners = [v for v in (best, runner, second) if v is not None and v < top]
            second = max(runners) if runners else None
            best, count = top, top_count
        else:
            if top == best:
                count += top_count
                cand = runner
            else:
                cand = top
            if cand is not None and (second is None or cand > second):
                second = cand
    return best, count, second


@_njit
def _sign_sum_extremes(s):
    # Gray-code walk: consecutive patterns differ in one sign
    size = s.shape[0]
    cur = 0
    for x in range(size):
        cur += s[x]
    signs = np.ones(size, dtype=np.int64)
    best = cur
    best_count = 1
    second = -(1 << 62)
    total = 1 << size
    for g in range(1, total):
        bit = 0
        t = g
        while (t & 1) == 0:
            t >>= 1
            bit += 1
        cur -= 2 * signs[bit] * s[bit]
        signs[bit] = -signs[bit]
        if cur > best:
            second = best
            best = cur
            best_count = 1
        elif cur == best:
            best_count += 1
        elif cur > second:
            second = cur
    return best, best_count, second


def sign_sum_extremes_numba(s: np.ndarray):
    best, count, second = _sign_sum_extremes(np.ascontiguousarray(s, dtype=np.int64))
    return int(best), int(count), int(second)


def sign_sum_extremes(s: np.ndarray):
    return sign_sum_extremes_numba(s) if _use_numba else sign_sum_extremes_numpy(s)


if not HAVE_NUMBA:  # pragma: no cover
    fwht_numba = fwht_numpy
    profiles_numba = profiles_numpy
    orbit_min_numba = orbit_min_numpy
    extension_eval_numba = extension_eval_numpy
    sign_sum_extremes_numba = sign_sum_extremes_numpy
