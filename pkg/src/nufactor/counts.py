"""Exact counts over (x, x+y]: omega histograms, rough / window-restricted
subsets and prime harmonic sums.

All counts stream the interval in segments and merge with plain integer
addition, so results are independent of segmentation and thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import isqrt, log
from typing import Callable, NamedTuple

import numpy as np

from . import sieve
from .scales import NU_CAP, nu_scale, z_star
from .sieve import DEFAULT_SEGMENT, PrimeTable, SieveRangeError


@dataclass(frozen=True)
class OmegaHistogram:
    """Counts of n in (x, x+y] by number of prime divisors."""

    x: int
    y: int
    mode: str  # "distinct" or "withMultiplicity"
    counts: np.ndarray  # uint64, index nu = 0..NU_CAP

    def __getitem__(self, nu: int) -> int:
        return int(self.counts[nu]) if nu <= NU_CAP else 0

    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class CountRecord:
    """One comparison row: exact interval count vs predicted y * density."""

    x: int
    y: int
    nu: int
    exact: int
    predicted: float
    ratio: float


class RoughCount(NamedTuple):
    count: int
    density: float


class MertensSum(NamedTuple):
    value: float
    centered: float  # value - log log x


class RestrictedCount(NamedTuple):
    count: int
    harmonic_sum: float


def _map_segments(
    x: int,
    y: int,
    table: PrimeTable,
    worker: Callable[[sieve.FactoredInterval], np.ndarray],
    threads: int = 1,
    segment_size: int = DEFAULT_SEGMENT,
    window: tuple[int, int] | None = None,
) -> list:
    """Apply `worker` to each factored segment, preserving segment order."""
    sieve._check_interval(x, y, table)
    bounds = sieve.segment_bounds(x, y, segment_size)
    root = isqrt(x + y)

    def job(b):
        lo, hi = b
        return worker(
            sieve.sieve_segment(lo, hi, table, window=window, sieve_root=root)
        )

    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(job, bounds))
    return [job(b) for b in bounds]


def _auto_table(x: int, y: int, table: PrimeTable | None) -> PrimeTable:
    return table if table is not None else sieve.table_for_interval(x, y)


def omega_histogram(
    x: int,
    y: int,
    mode: str = "distinct",
    table: PrimeTable | None = None,
    threads: int = 1,
    segment_size: int = DEFAULT_SEGMENT,
) -> OmegaHistogram:
    """Histogram of omega (or big-omega) over (x, x+y].

    Long counts are the special case x=0, y=x.
    """
    if mode not in ("distinct", "withMultiplicity"):
        raise ValueError(f"unknown mode {mode!r}")
    table = _auto_table(x, y, table)

    def worker(seg):
        arr = seg.omega if mode == "distinct" else seg.big_omega
        return np.bincount(arr.astype(np.int64), minlength=NU_CAP + 1)

    parts = _map_segments(x, y, table, worker, threads, segment_size)
    counts = np.zeros(NU_CAP + 1, dtype=np.uint64)
    for p in parts:
        if len(p) > NU_CAP + 1:
            raise SieveRangeError("omega exceeded the documented cap of 64")
        counts[: len(p)] += p.astype(np.uint64)
    return OmegaHistogram(x=x, y=y, mode=mode, counts=counts)


def _rough_mask(seg: sieve.FactoredInterval, t: int) -> np.ndarray:
    """Mask of n in the segment with least prime factor > t (true for n=1)."""
    mask = seg.least_prime_factor > np.uint64(t)
    if seg.lo == 0:  # n=1 has no prime factor at all
        mask[0] = True
    return mask


def rough_count(
    x: int,
    v: int,
    t: int,
    table: PrimeTable | None = None,
    threads: int = 1,
    segment_size: int = DEFAULT_SEGMENT,
) -> RoughCount:
    """|{n <= x : omega(n)=v, least prime factor > t}| with its density."""
    if not 1 <= t <= x:
        raise SieveRangeError(f"roughness threshold t={t} outside [1, {x}]")
    table = _auto_table(0, x, table)

    def worker(seg):
        return int(np.count_nonzero((seg.omega == v) & _rough_mask(seg, t)))

    total = sum(_map_segments(0, x, table, worker, threads, segment_size))
    return RoughCount(count=total, density=total / x)


def restricted_count(
    x: int,
    interval: tuple[int, int],
    v: int,
    table: PrimeTable | None = None,
    threads: int = 1,
    segment_size: int = DEFAULT_SEGMENT,
) -> RestrictedCount:
    """Count and harmonic sum of n <= x whose v distinct primes all lie in [a, b].

    Prime powers are allowed: the condition constrains the distinct primes only.
    """
    a, b = interval
    if not 2 <= a <= b <= x:
        raise SieveRangeError(f"prime interval [{a}, {b}] invalid for x={x}")
    if v == 0:
        return RestrictedCount(count=1, harmonic_sum=1.0)  # n=1 only
    table = _auto_table(0, x, table)

    def worker(seg):
        hit = (seg.omega == v) & (seg.window_omega == v)
        n_hit = seg.values()[hit]
        return (int(hit.sum()), float(np.sum(1.0 / n_hit)) if n_hit.size else 0.0)

    parts = _map_segments(0, x, table, worker, threads, segment_size, window=(a, b))
    count = sum(c for c, _ in parts)
    harmonic = math.fsum(h for _, h in parts)
    return RestrictedCount(count=count, harmonic_sum=harmonic)


def restricted_harmonic_bound(x: int, interval: tuple[int, int], v: int) -> float:
    """Combinatorial bound (sum over p in [a,b] of sum_k p^-k)^v / v!.

    Exact inequality for the restricted harmonic sum, at any scale.
    """
    a, b = interval
    table = sieve.cached_prime_table(max(b, 3))
    lo = int(np.searchsorted(table.primes, a, side="left"))
    hi = int(np.searchsorted(table.primes, b, side="right"))
    ps = table.primes[lo:hi].astype(np.float64)
    base = math.fsum(1.0 / (ps - 1.0))  # sum over k>=1 of p^-k = 1/(p-1)
    return base**v / math.factorial(v)


def windowed_count(
    x: int,
    v: int,
    v1: int,
    c: float,
    t: int,
    table: PrimeTable | None = None,
    threads: int = 1,
    segment_size: int = DEFAULT_SEGMENT,
) -> int:
    """t-rough n <= x with omega(n)=v, exactly v1 of the primes in the
    window [z*(c), z*(c/2)] attached to index v1."""
    if v1 > v:
        raise SieveRangeError(f"v1={v1} exceeds v={v}")
    if not 0.0 < c < 0.99:
        raise SieveRangeError(f"window coefficient c={c} outside (0, 0.99)")
    if t < 1:
        raise SieveRangeError(f"roughness threshold t={t} must be >= 1")
    log_x = log(x)
    if v1 == 0:
        window = (3, 2)  # empty window; constraint is omega_window = 0
    else:
        z_lo = int(z_star(v1, c, log_x))
        z_hi = int(z_star(v1, c / 2.0, log_x))
        if z_lo > z_hi:
            raise SieveRangeError(
                f"degenerate window: z*({c})={z_lo} > z*({c / 2})={z_hi}"
            )
        window = (z_lo, z_hi)
    table = _auto_table(0, x, table)

    def worker(seg):
        return int(
            np.count_nonzero(
                (seg.omega == v) & (seg.window_omega == v1) & _rough_mask(seg, t)
            )
        )

    return sum(_map_segments(0, x, table, worker, threads, segment_size, window))


def windowed_lower_bound(x: int, v: int, v1: int, c: float, t: int) -> float:
    """Structural lower bound for the windowed density: the product of the
    choice counts for v-v1 small primes, v1 window primes and one large prime.

    Returns the bound on the density (count / x); valid asymptotically when
    t <= sqrt(z*_v(c)), degenerate otherwise (may come out <= 0 or useless).
    """
    log_x = log(x)
    v0 = v - v1
    z_v = z_star(v, c, log_x)
    inner = log(log(z_v) / log(2 * t))
    return (
        inner**v0
        * nu_scale(v1, log_x) ** (c * v1)
        / (2**v * math.factorial(v) * log_x)
    )


def mertens_sum(
    x: int,
    table: PrimeTable | None = None,
    segment_size: int = DEFAULT_SEGMENT,
) -> MertensSum:
    """Sum of 1/p over primes p <= x, with its log log x centering."""
    if x < 2:
        raise SieveRangeError(f"x={x} must be >= 2 for a prime harmonic sum")
    base = sieve.cached_prime_table(max(isqrt(x) + 1, 3)) if table is None else table
    pieces = []
    for lo, hi in sieve.segment_bounds(1, x - 1, segment_size):
        # mark composites in (lo, hi] with the base primes; survivors are prime
        count = hi - lo
        flags = np.ones(count, dtype=bool)
        root = isqrt(hi)
        n_base = int(np.searchsorted(base.primes, root, side="right"))
        for p in base.primes[:n_base].tolist():
            start = max((lo // p + 1) * p, p * p)
            if start <= hi:
                flags[start - lo - 1 :: p] = False
        ns = np.arange(lo + 1, hi + 1, dtype=np.float64)
        primes = ns[flags]
        primes = primes[primes >= 2.0]
        pieces.append(float(np.sum(1.0 / primes)) if primes.size else 0.0)
    value = math.fsum(pieces)
    return MertensSum(value=value, centered=value - log(log(x)))
