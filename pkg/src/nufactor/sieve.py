"""Segmented factorization sieve over half-open integer intervals (x, x+y].

Every integer in the interval gets full small-prime factorization data:
distinct/total prime-divisor counts, least prime factor, powerful part and
the single leftover prime factor above sqrt(x+y) (if any).  Intervals are
processed in fixed-width segments so memory stays bounded and results are
independent of the segmentation.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from math import isqrt

import numpy as np

DEFAULT_SEGMENT = 1 << 20
PRIME_LIMIT_MAX = 1 << 40
_PRACTICAL_LIMIT_MAX = 1 << 31  # flat sieve allocation guard
_CACHE_MAGIC = b"NUFPRIME"
_MAX_64 = (1 << 63) - 1


class SieveRangeError(ValueError):
    """Inputs outside the supported 64-bit / table ranges."""


class TableTooSmallError(ValueError):
    """Prime table does not cover sqrt of the interval top."""


@dataclass(frozen=True)
class PrimeTable:
    """All primes up to `limit`, strictly increasing, first element 2."""

    limit: int
    primes: np.ndarray  # uint64

    def __post_init__(self):
        if self.primes.dtype != np.uint64:
            object.__setattr__(self, "primes", self.primes.astype(np.uint64))

    def __len__(self):
        return len(self.primes)

    def covers(self, top: int) -> bool:
        """True if the table suffices to fully factor every n <= top."""
        return self.limit * self.limit >= top


def build_prime_table(limit: int) -> PrimeTable:
    """Sieve of Eratosthenes up to and including `limit`."""
    if limit < 2 or limit > PRIME_LIMIT_MAX:
        raise SieveRangeError(f"prime table limit {limit} outside [2, 2^40]")
    if limit > _PRACTICAL_LIMIT_MAX:
        raise SieveRangeError(
            f"prime table limit {limit} exceeds flat-sieve capacity 2^31"
        )
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return PrimeTable(limit=limit, primes=np.flatnonzero(flags).astype(np.uint64))


def save_prime_table(table: PrimeTable, path: str) -> None:
    """Write a table as magic + limit + little-endian uint64 gap stream."""
    primes = table.primes.astype(np.int64)
    gaps = np.diff(primes, prepend=0).astype("<u8")
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(struct.pack("<Q", table.limit))
        fh.write(gaps.tobytes())


def load_prime_table(path: str) -> PrimeTable:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _CACHE_MAGIC:
            raise SieveRangeError(f"{path}: bad prime cache magic {magic!r}")
        (limit,) = struct.unpack("<Q", fh.read(8))
        gaps = np.frombuffer(fh.read(), dtype="<u8")
    primes = np.cumsum(gaps.astype(np.uint64), dtype=np.uint64)
    return PrimeTable(limit=int(limit), primes=primes)


def cached_prime_table(limit: int, cache_dir: str | None = None) -> PrimeTable:
    """Build or reuse a cached table covering at least `limit`.

    Cache directory comes from `cache_dir` or NUFACTOR_CACHE_DIR; without
    either the table is built in memory only.
    """
    cache_dir = cache_dir or os.environ.get("NUFACTOR_CACHE_DIR")
    if not cache_dir:
        return build_prime_table(limit)
    os.makedirs(cache_dir, exist_ok=True)
    path = os.path.join(cache_dir, f"primes_{limit}.bin")
    if os.path.exists(path):
        table = load_prime_table(path)
        if table.limit >= limit:
            return table
    table = build_prime_table(limit)
    save_prime_table(table, path)
    return table


@dataclass
class FactoredInterval:
    """Per-integer factor statistics for (lo, hi]; arrays indexed by n-lo-1.

    large_factor holds the one prime factor above sieve_root (1 if none);
    powerful_part is the product of p^e over primes with e >= 2.  The sieve
    root is fixed by the whole requested interval, not the segment, so
    records are bit-identical under any segmentation.
    """

    lo: int
    hi: int
    sieve_root: int  # primes <= this were divided out explicitly
    omega: np.ndarray  # uint8, distinct prime divisors
    big_omega: np.ndarray  # uint8, with multiplicity
    least_prime_factor: np.ndarray  # uint64, 0 for n=1
    powerful_part: np.ndarray  # uint64
    large_factor: np.ndarray  # uint64
    window_omega: np.ndarray | None = None  # distinct primes inside a window

    def __len__(self):
        return self.hi - self.lo

    @property
    def squarefree(self) -> np.ndarray:
        return self.omega == self.big_omega

    def values(self) -> np.ndarray:
        """The integers of the interval, as uint64."""
        return np.arange(self.lo + 1, self.hi + 1, dtype=np.uint64)


def segment_bounds(x: int, y: int, segment_size: int = DEFAULT_SEGMENT):
    """Split (x, x+y] into contiguous (lo, hi] chunks of at most segment_size."""
    bounds = []
    lo = x
    while lo < x + y:
        hi = min(lo + segment_size, x + y)
        bounds.append((lo, hi))
        lo = hi
    return bounds


def _check_interval(x: int, y: int, table: PrimeTable) -> None:
    if y < 1:
        raise SieveRangeError(f"interval length {y} must be >= 1")
    if x < 0 or x + y > _MAX_64:
        raise SieveRangeError(f"interval ({x}, {x + y}] outside 64-bit range")
    if not table.covers(x + y):
        raise TableTooSmallError(
            f"table limit {table.limit} cannot factor up to {x + y}"
        )


def sieve_segment(
    lo: int,
    hi: int,
    table: PrimeTable,
    window: tuple[int, int] | None = None,
    sieve_root: int | None = None,
) -> FactoredInterval:
    """Fully factor every integer in (lo, hi] using primes <= sieve_root.

    sieve_root defaults to sqrt(hi) and must never be below it; segmented
    callers pass the root of the full interval so the leftover-prime field
    does not depend on segment boundaries.  With `window` = (a, b), also
    count distinct prime divisors inside [a, b].
    """
    count = hi - lo
    omega = np.zeros(count, dtype=np.uint8)
    bigom = np.zeros(count, dtype=np.uint8)
    lpf = np.zeros(count, dtype=np.uint64)
    powerful = np.ones(count, dtype=np.uint64)
    residual = np.arange(lo + 1, hi + 1, dtype=np.uint64)

    root = sieve_root if sieve_root is not None else isqrt(hi)
    if root < isqrt(hi):
        raise SieveRangeError(f"sieve root {root} below sqrt({hi})")
    n_primes = int(np.searchsorted(table.primes, root, side="right"))
    for p in table.primes[:n_primes].tolist():
        start = (lo // p + 1) * p  # first multiple of p above lo
        if start > hi:
            continue
        idx = slice(start - lo - 1, count, p)
        omega[idx] += 1
        bigom[idx] += 1
        sub = lpf[idx]
        lpf[idx] = np.where(sub == 0, np.uint64(p), sub)
        residual[idx] //= np.uint64(p)
        pk = p * p
        first_power = True
        while pk <= hi:
            start_k = (lo // pk + 1) * pk
            if start_k <= hi:
                idxk = slice(start_k - lo - 1, count, pk)
                bigom[idxk] += 1
                residual[idxk] //= np.uint64(p)
                # p^2 multiples pick up p^2, each further power one more p,
                # so exact exponent e >= 2 accumulates p^e in total
                powerful[idxk] *= np.uint64(p * p if first_power else p)
            first_power = False
            pk *= p

    big = residual > 1
    omega[big] += 1
    bigom[big] += 1
    lpf[big] = np.where(lpf[big] == 0, residual[big], lpf[big])

    wcount = None
    if window is not None:
        a, b = window
        wcount = np.zeros(count, dtype=np.uint8)
        if b >= a and b >= 2:
            w_lo = int(np.searchsorted(table.primes, max(a, 2), side="left"))
            w_hi = int(np.searchsorted(table.primes, min(b, root), side="right"))
            for p in table.primes[w_lo:w_hi].tolist():
                start = (lo // p + 1) * p
                if start > hi:
                    continue
                wcount[slice(start - lo - 1, count, p)] += 1
            # primes above sqrt(hi) occur only as the leftover factor
            in_win = big & (residual >= np.uint64(max(a, root + 1))) & (
                residual <= np.uint64(b)
            )
            wcount[in_win] += 1

    return FactoredInterval(
        lo=lo,
        hi=hi,
        sieve_root=root,
        omega=omega,
        big_omega=bigom,
        least_prime_factor=lpf,
        powerful_part=powerful,
        large_factor=np.where(big, residual, np.uint64(1)),
        window_omega=wcount,
    )


def iter_factored_segments(
    x: int,
    y: int,
    table: PrimeTable,
    segment_size: int = DEFAULT_SEGMENT,
    window: tuple[int, int] | None = None,
):
    """Yield FactoredInterval segments covering (x, x+y] in order."""
    _check_interval(x, y, table)
    root = isqrt(x + y)
    for lo, hi in segment_bounds(x, y, segment_size):
        yield sieve_segment(lo, hi, table, window=window, sieve_root=root)


def sieve_interval(
    x: int,
    y: int,
    table: PrimeTable,
    segment_size: int = DEFAULT_SEGMENT,
    window: tuple[int, int] | None = None,
) -> FactoredInterval:
    """Materialize factor statistics for the whole of (x, x+y]."""
    parts = list(iter_factored_segments(x, y, table, segment_size, window))
    if len(parts) == 1:
        return parts[0]
    return FactoredInterval(
        lo=x,
        hi=x + y,
        sieve_root=parts[0].sieve_root,
        omega=np.concatenate([p.omega for p in parts]),
        big_omega=np.concatenate([p.big_omega for p in parts]),
        least_prime_factor=np.concatenate([p.least_prime_factor for p in parts]),
        powerful_part=np.concatenate([p.powerful_part for p in parts]),
        large_factor=np.concatenate([p.large_factor for p in parts]),
        window_omega=(
            np.concatenate([p.window_omega for p in parts])
            if window is not None
            else None
        ),
    )


def table_for_interval(x: int, y: int, cache_dir: str | None = None) -> PrimeTable:
    """A prime table just large enough to factor (x, x+y]."""
    need = isqrt(x + y) + 1
    return cached_prime_table(max(need, 3), cache_dir=cache_dir)
