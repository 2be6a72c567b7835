"""Enumeration of C(X): globally minimal short models of height at most X."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .arith import iroot, primes_up_to
from .curve_model import CurveModel, trusted_curve
from .intervals import EulerProductValue, power_enclosure

RowFilter = Callable[[int, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class HeightBound:
    X: int

    def __post_init__(self):
        if int(self.X) != self.X or self.X < 1:
            raise ValueError(f"height bound must be a positive integer, got {self.X!r}")
        a, b = self.A_max, self.B_max
        assert a**3 <= self.X < (a + 1) ** 3
        assert b**2 <= self.X < (b + 1) ** 2

    @property
    def A_max(self) -> int:
        return iroot(self.X, 3)

    @property
    def B_max(self) -> int:
        return math.isqrt(self.X)

    def contains(self, A: int, B: int) -> bool:
        return abs(A) <= self.A_max and abs(B) <= self.B_max


@dataclass(frozen=True)
class RangeShard:
    A_lo: int
    A_hi: int  # exclusive
    bound: HeightBound

    def __len__(self) -> int:
        return max(0, self.A_hi - self.A_lo)


def full_shard(bound: HeightBound) -> RangeShard:
    return RangeShard(-bound.A_max, bound.A_max + 1, bound)


def shard(bound: HeightBound, jobs: int) -> list[RangeShard]:
    """Split [-A_max, A_max] into ``jobs`` contiguous strips of near-equal size."""
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    lo, n = -bound.A_max, 2 * bound.A_max + 1
    cuts = [lo + (n * i) // jobs for i in range(jobs + 1)]
    return [RangeShard(cuts[i], cuts[i + 1], bound) for i in range(jobs)]


def shard_by_width(bound: HeightBound, width: int) -> list[RangeShard]:
    """Strips of ``width`` consecutive A values (the last one may be shorter)."""
    if width < 1:
        raise ValueError("width must be >= 1")
    lo, hi = -bound.A_max, bound.A_max + 1
    return [RangeShard(a, min(a + width, hi), bound) for a in range(lo, hi, width)]


class _Sieve:
    """Per-row exclusion of singular and non-minimal pairs."""

    def __init__(self, bound: HeightBound):
        self.B_max = bound.B_max
        # l^4 | A and l^6 | B with B != 0 forces l^6 <= B_max.
        self.primes = primes_up_to(max(1, iroot(bound.B_max, 6)))
        self.small_primes_for_b0 = primes_up_to(max(1, iroot(bound.A_max, 4)))

    def mask(self, A: int, B: np.ndarray) -> np.ndarray:
        ok = np.ones(B.shape, dtype=bool)
        # 4A^3 + 27B^2 = 0 iff A = -3t^2, B = +-2t^3.
        if A <= 0 and A % 3 == 0:
            t = math.isqrt(-A // 3)
            if 3 * t * t == -A:
                ok &= np.abs(B) != 2 * t**3
        for ell in self.primes:
            if A % ell**4 == 0:
                ok &= (B % ell**6) != 0
        if A != 0 and any(A % ell**4 == 0 for ell in self.small_primes_for_b0):
            ok &= B != 0
        return ok


def iter_rows(
    bound: HeightBound, part: RangeShard | None = None, row_filter: RowFilter | None = None
) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (A, sorted array of admissible B) for each A in the shard."""
    part = full_shard(bound) if part is None else part
    sieve = _Sieve(bound)
    B = np.arange(-bound.B_max, bound.B_max + 1, dtype=np.int64)
    lo = max(part.A_lo, -bound.A_max)
    hi = min(part.A_hi, bound.A_max + 1)
    for A in range(lo, hi):
        ok = sieve.mask(A, B)
        if row_filter is not None:
            ok &= row_filter(A, B)
        yield A, B[ok]


def enumerate_curves(
    bound: HeightBound, height_ordered: bool = False, part: RangeShard | None = None
) -> Iterator[CurveModel]:
    """Stream C(X) in (A, B) order, or in (height, A, B) order if requested."""
    if not height_ordered:
        for A, Bs in iter_rows(bound, part):
            for b in Bs.tolist():
                yield trusted_curve(A, b)
        return

    def row(A: int, Bs: np.ndarray):
        a3 = abs(A) ** 3
        keyed = sorted((max(a3, b * b), A, b) for b in Bs.tolist())
        return iter(keyed)

    rows = [row(A, Bs) for A, Bs in iter_rows(bound, part)]
    for _, A, b in heapq.merge(*rows):
        yield trusted_curve(A, b)


def count_curves_exact(bound: HeightBound, part: RangeShard | None = None,
                       row_filter: RowFilter | None = None) -> int:
    return sum(len(Bs) for _, Bs in iter_rows(bound, part, row_filter))


@dataclass(frozen=True)
class CurveCount:
    X: int
    count: int
    brumer_ratio: EulerProductValue


def brumer_ratio(count: int, X: int, zeta10: EulerProductValue | None = None) -> EulerProductValue:
    """count * zeta(10) / (4 X^(5/6)) as an interval."""
    if zeta10 is None:
        from .constants import zeta_10

        zeta10 = zeta_10(Fraction(1, 10**20))
    return (count * zeta10 / (4 * power_enclosure(X, 5, 6))).named("#C(X) zeta(10) / 4X^(5/6)")


def count_curves(bound: HeightBound, shards: Sequence[RangeShard] | None = None) -> CurveCount:
    parts = shards if shards is not None else [full_shard(bound)]
    n = sum(count_curves_exact(bound, p) for p in parts)
    return CurveCount(bound.X, n, brumer_ratio(n, bound.X))


# --- congruence sublattices ------------------------------------------------


def combine_classes(
    classes: Iterable[tuple[int, Iterable[tuple[int, int]]]],
) -> tuple[int, list[tuple[int, int]]]:
    """CRT-combine residue-pair sets with pairwise coprime moduli."""
    M = 1
    pairs = [(0, 0)]
    for m, residues in classes:
        if math.gcd(M, m) != 1:
            raise ValueError(f"moduli {M} and {m} are not coprime")
        res = sorted({(a % m, b % m) for a, b in residues})
        inv = pow(M, -1, m) if m > 1 else 0
        new = []
        for a0, b0 in pairs:
            for a1, b1 in res:
                a = a0 + M * ((a1 - a0) * inv % m) if m > 1 else a0
                b = b0 + M * ((b1 - b0) * inv % m) if m > 1 else b0
                new.append((a, b))
        M *= m
        pairs = sorted(new)
    return M, pairs


def enumerate_in_lattice(
    classes: Iterable[tuple[int, Iterable[tuple[int, int]]]],
    bound: HeightBound,
    sign_constraint: bool = False,
    part: RangeShard | None = None,
) -> Iterator[CurveModel]:
    """Members of C(X) whose (A, B) lie in the CRT-combined residue classes."""
    for A, Bs in iter_lattice_rows(classes, bound, sign_constraint, part):
        for b in Bs.tolist():
            yield trusted_curve(A, b)


def iter_lattice_rows(classes, bound: HeightBound, sign_constraint: bool = False,
                      part: RangeShard | None = None) -> Iterator[tuple[int, np.ndarray]]:
    M, pairs = combine_classes(classes)
    if not pairs:
        return
    part = full_shard(bound) if part is None else part
    lo = max(part.A_lo, -bound.A_max, 1 if sign_constraint else -bound.A_max)
    hi = min(part.A_hi, bound.A_max + 1)
    if lo >= hi:
        return
    by_a: dict[int, list[int]] = {}
    for a, b in pairs:
        by_a.setdefault(a, []).append(b)
    sieve = _Sieve(bound)
    starts = {}
    for a, bs in by_a.items():
        first = lo + (a - lo) % M
        for A in range(first, hi, M):
            starts.setdefault(A, []).extend(bs)
    Bmax = bound.B_max
    for A in sorted(starts):
        chunks = []
        for b in sorted(set(starts[A])):
            first = -Bmax + (b + Bmax) % M
            chunks.append(np.arange(first, Bmax + 1, M, dtype=np.int64))
        Bs = np.sort(np.concatenate(chunks)) if chunks else np.zeros(0, dtype=np.int64)
        yield A, Bs[sieve.mask(A, Bs)]
