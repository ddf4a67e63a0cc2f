"""Integer representations by sums of squares and the rational point sets on S^d.

A point of height n is stored as its integer numerator vector m with
|m|^2 = n^2 and gcd(m, n) = 1.  Point sets keep the numerators in an
``(N, d+1)`` int64 array together with a per-point height column.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from math import gcd, isqrt

import numpy as np

from .number_theory import chi4, divisors, factorize, mobius

MAX_K_DIM3 = 10**10
MAX_K_HIGHER = 10**8

# rows of the (m3, m1) grid handled per numpy block
_BLOCK_CELLS = 1 << 22


@dataclass(frozen=True)
class RationalSpherePoint:
    m: tuple[int, ...]
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("height must be positive")
        if sum(x * x for x in self.m) != self.n * self.n:
            raise ValueError(f"{self.m} does not have squared length {self.n}^2")
        g = self.n
        for x in self.m:
            g = gcd(g, x)
        if g != 1:
            raise ValueError(f"{self.m}/{self.n} is not in lowest terms")

    @property
    def d(self) -> int:
        return len(self.m) - 1

    def coords(self) -> np.ndarray:
        return np.asarray(self.m, dtype=float) / self.n


@dataclass
class PointSet:
    """Rational points on S^d.

    ``label`` is ``("fixed", n)`` for Omega_n and ``("upto", T)`` for Omega_T.
    """

    d: int
    numerators: np.ndarray
    heights: np.ndarray
    label: tuple[str, int]

    def __len__(self) -> int:
        return len(self.heights)

    def coords(self) -> np.ndarray:
        """Float coordinates m/n, shape (N, d+1)."""
        return self.numerators / self.heights[:, None].astype(float)

    def __iter__(self):
        for m, n in zip(self.numerators.tolist(), self.heights.tolist()):
            yield RationalSpherePoint(tuple(m), n)

    def check_invariants(self) -> None:
        m = self.numerators.astype(object) if self.heights.max(initial=0) > 3 * 10**9 else self.numerators
        if len(self) == 0:
            return
        sq = (m * m).sum(axis=1)
        if not np.all(sq == self.heights.astype(sq.dtype) ** 2):
            raise AssertionError("point off the sphere")
        g = np.gcd.reduce(np.column_stack([self.numerators, self.heights]), axis=1)
        if not np.all(g == 1):
            raise AssertionError("point not in lowest terms")
        if self.label[0] == "fixed" and not np.all(self.heights == self.label[1]):
            raise AssertionError("mixed heights in a fixed-height set")


def _check_dim(dim: int) -> None:
    if not 3 <= dim <= 6:
        raise ValueError(f"dimension d+1 must lie in [3, 6], got {dim}")


def _isqrt_array(rem: np.ndarray) -> np.ndarray:
    r = np.sqrt(rem.astype(np.float64)).astype(np.int64)
    r -= (r * r > rem).astype(np.int64)
    r += ((r + 1) * (r + 1) <= rem).astype(np.int64)
    return r


def _nonneg_triples(k: int) -> np.ndarray:
    """All (m1, m2, m3) >= 0 with m1^2 + m2^2 + m3^2 = k, scanning m3-slices."""
    B = isqrt(k)
    m1 = np.arange(B + 1, dtype=np.int64)
    sq1 = m1 * m1
    rows = max(1, _BLOCK_CELLS // (B + 1))
    found = []
    for start in range(0, B + 1, rows):
        m3 = np.arange(start, min(B + 1, start + rows), dtype=np.int64)
        rem = k - (m3 * m3)[:, None] - sq1[None, :]
        ok = rem >= 0
        rem = np.where(ok, rem, 0)
        r = _isqrt_array(rem)
        hit = ok & (r * r == rem)
        i3, i1 = np.nonzero(hit)
        if len(i3):
            found.append(np.column_stack([m1[i1], r[i3, i1], m3[i3]]))
    if not found:
        return np.zeros((0, 3), dtype=np.int64)
    return np.concatenate(found)


def _expand_signs(rows: np.ndarray) -> np.ndarray:
    if len(rows) == 0:
        return rows
    dim = rows.shape[1]
    parts = [rows * np.asarray(s, dtype=np.int64) for s in product((1, -1), repeat=dim)]
    return np.unique(np.concatenate(parts), axis=0)


def _lex_sort(vecs: np.ndarray) -> np.ndarray:
    if len(vecs) == 0:
        return vecs
    # last coordinate is the primary key
    order = np.lexsort(tuple(vecs[:, i] for i in range(vecs.shape[1])))
    return vecs[order]


@lru_cache(maxsize=512)
def _representations_cached(k: int, dim: int) -> np.ndarray:
    if dim == 3:
        out = _expand_signs(_nonneg_triples(k))
    else:
        B = isqrt(k)
        chunks = []
        for last in range(-B, B + 1):
            sub = _representations_cached(k - last * last, dim - 1)
            if len(sub):
                chunks.append(np.column_stack([sub, np.full(len(sub), last, dtype=np.int64)]))
        out = np.concatenate(chunks) if chunks else np.zeros((0, dim), dtype=np.int64)
    out = _lex_sort(out)
    out.setflags(write=False)
    return out


def representations(k: int, dim: int) -> np.ndarray:
    """All integer vectors in Z^dim of squared length k, lexicographic on (m_dim, ..., m_1)."""
    _check_dim(dim)
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > (MAX_K_DIM3 if dim == 3 else MAX_K_HIGHER):
        raise ValueError(f"k={k} is beyond the supported range for dimension {dim}")
    if k == 0:
        return np.zeros((1, dim), dtype=np.int64)
    return _representations_cached(k, dim)


def _count_signed(rows: np.ndarray) -> int:
    if len(rows) == 0:
        return 0
    return int((2 ** np.count_nonzero(rows, axis=1)).sum())


@lru_cache(maxsize=4096)
def _r_count_cached(k: int, dim: int) -> int:
    if k == 0:
        return 1
    if dim == 3:
        trip = _nonneg_triples(k)
        return _count_signed(trip)
    B = isqrt(k)
    return sum(_r_count_cached(k - t * t, dim - 1) for t in range(-B, B + 1))


def r_count(k: int, dim: int) -> int:
    """Number of representations of k as a sum of dim squares."""
    _check_dim(dim)
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > (MAX_K_DIM3 if dim == 3 else MAX_K_HIGHER):
        raise ValueError(f"k={k} is beyond the supported range for dimension {dim}")
    return _r_count_cached(k, dim)


def omega_n(n: int, d: int = 2) -> PointSet:
    """Omega_n: rational points on S^d of height exactly n."""
    if n < 1:
        raise ValueError("height must be positive")
    reps = representations(n * n, d + 1)
    g = np.gcd.reduce(np.column_stack([reps, np.full(len(reps), n, dtype=np.int64)]), axis=1)
    pts = np.ascontiguousarray(reps[g == 1])
    out = PointSet(d, pts, np.full(len(pts), n, dtype=np.int64), ("fixed", n))
    if __debug__:
        out.check_invariants()
    return out


def omega_n_count_exact(n: int) -> int:
    """|Omega_n| on S^2 from the closed product formula (0 for even n)."""
    if n < 1:
        raise ValueError("height must be positive")
    if n % 2 == 0:
        return 0
    total = 6
    for p, e in factorize(n):
        total *= p ** (e - 1) * (p - chi4(p))
    return total


def omega_n_count_mobius(n: int, d: int = 2) -> int:
    """|Omega_n| as the Moebius-weighted sum of r_{d+1}(n^2/delta^2)."""
    return sum(mobius(q) * r_count((n // q) ** 2, d + 1) for q in divisors(n))


def omega_T(T: int, d: int = 2, workers: int | None = None) -> PointSet:
    """Omega_T: all rational points on S^d of height at most T, grouped by height."""
    if T < 1:
        raise ValueError("T must be positive")
    heights = range(1, T + 1)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            sets = list(pool.map(lambda n: omega_n(n, d), heights))
    else:
        sets = [omega_n(n, d) for n in heights]
    nums = np.concatenate([s.numerators for s in sets])
    hs = np.concatenate([s.heights for s in sets])
    return PointSet(d, nums, hs, ("upto", T))
