"""k-fold divisor function: exact pointwise values, capped short-interval
sums against the bound shapes, and the square-harmonic Euler product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb, exp, isqrt, lgamma, log

import numpy as np
from scipy.special import exp1

from . import sieve
from .density import DEFAULT_CONFIG, ConvergenceError, EulerProductConfig
from .scales import nu_scale, script_l
from .sieve import DEFAULT_SEGMENT, PrimeTable, SieveRangeError

_EXACT_SUM_CAP = float(1 << 53)  # float64 holds integers exactly below this


def tau_k(n: int, k: int, table: PrimeTable | None = None) -> int:
    """tau_k(n) = number of ordered k-tuples with product n; exact integer.

    Multiplicative with tau_k(p^e) = C(e+k-1, k-1).  Python integers make
    overflow a non-issue.
    """
    if n < 1:
        raise SieveRangeError(f"n={n} must be >= 1")
    if k < 1:
        raise SieveRangeError(f"k={k} must be >= 1")
    table = table if table is not None else sieve.cached_prime_table(max(isqrt(n) + 1, 3))
    if not table.covers(n):
        raise SieveRangeError(f"table limit {table.limit} cannot factor {n}")
    out = 1
    rem = n
    for p in table.primes.tolist():
        if p * p > rem:
            break
        if rem % p == 0:
            e = 0
            while rem % p == 0:
                rem //= p
                e += 1
            out *= comb(e + k - 1, k - 1)
    if rem > 1:
        out *= k
    return out


def _tau_segment(seg: sieve.FactoredInterval, k: int, table: PrimeTable) -> np.ndarray:
    """Exact tau_k over one factored segment, vectorized per prime power.

    Builds the multiplicative value by exact-exponent classes; every factor
    and product stays an exact integer in float64 (far below 2^53).
    """
    count = len(seg)
    nvals = seg.values()
    out = np.ones(count)
    max_e = max(2, int(math.log2(seg.hi)) + 1)
    comb_by_e = np.array([comb(e + k - 1, k - 1) for e in range(max_e + 1)], dtype=np.float64)
    n_primes = int(np.searchsorted(table.primes, seg.sieve_root, side="right"))
    for p in table.primes[:n_primes].tolist():
        start = (seg.lo // p + 1) * p
        if start > seg.hi:
            continue
        idx = np.arange(start - seg.lo - 1, count, p)
        rem = nvals[idx] // np.uint64(p)
        e = np.ones(len(idx), dtype=np.int64)
        live = rem % np.uint64(p) == 0
        while live.any():
            rem[live] //= np.uint64(p)
            e[live] += 1
            live &= rem % np.uint64(p) == 0
        out[idx] *= comb_by_e[e]
    out[seg.large_factor > 1] *= float(k)
    return out


@dataclass(frozen=True)
class DivisorSumReport:
    """Short-interval tau_k sum under an omega/big-omega cap, with the
    log-space bound it is compared against."""

    x: int
    y: int
    k: int
    cap: float  # script_l(x, a)
    cap_mode: str  # omega | bigOmega | none
    total: float
    log_total: float
    paper_bound_log: float
    within_bound: bool
    regime_shadow: bool  # cap excludes everything / k outside sharp range


def short_divisor_sum(
    x: int,
    y: int,
    k: int,
    a: float = 4.5,
    cap_mode: str = "bigOmega",
    b_const: float = 10.0,
    sharp: bool = False,
    gamma: float = 6.0,
    epsilon: float = 0.1,
    table: PrimeTable | None = None,
    segment_size: int = DEFAULT_SEGMENT,
) -> DivisorSumReport:
    """Sum tau_k(n) over n in (x, x+y] with omega/big-omega at most
    script_l(x, a); compare against the configured bound shape.

    Default bound: y (log(B k))^{11k} (log x)^{2+k}.  The sharp variant uses
    y (log k)^{11k} exp(((gamma+eps)/(gamma-1)) k nu_scale(k)) and needs
    k <= script_l(x, gamma) with gamma > a+1.
    """
    if k < 1:
        raise SieveRangeError(f"k={k} must be >= 1")
    if cap_mode not in ("omega", "bigOmega", "none"):
        raise SieveRangeError(f"unknown cap mode {cap_mode!r}")
    log_x = log(x) if x > 0 else log(x + y)
    cap = script_l(log_x, a)
    if cap < 0:
        raise SieveRangeError(f"cap {cap} < 0")
    table = table if table is not None else sieve.table_for_interval(x, y)
    pieces = []
    for seg in sieve.iter_factored_segments(x, y, table, segment_size):
        tau_vals = _tau_segment(seg, k, table)
        if cap_mode == "omega":
            mask = seg.omega <= cap
        elif cap_mode == "bigOmega":
            mask = seg.big_omega <= cap
        else:
            mask = np.ones(len(seg), dtype=bool)
        pieces.append(float(np.sum(tau_vals[mask])))
    total = math.fsum(pieces)
    if total > _EXACT_SUM_CAP:
        raise SieveRangeError(
            f"tau_{k} interval total {total:.3e} exceeds exact float range"
        )
    shadow = cap < 1.0
    if sharp:
        if not (gamma > a + 1.0 > 5.0):
            raise SieveRangeError(f"sharp bound needs gamma > a+1 > 5, got {gamma}, {a}")
        if k < 2 or k > script_l(log_x, gamma):
            shadow = True
        bound_log = (
            log(y)
            + 11.0 * k * log(log(float(k)))
            + (gamma + epsilon) / (gamma - 1.0) * k * nu_scale(k, log_x)
        )
    else:
        bound_log = log(y) + 11.0 * k * log(log(b_const * k)) + (2.0 + k) * log(log_x)
    log_total = log(total) if total > 0 else float("-inf")
    return DivisorSumReport(
        x=x,
        y=y,
        k=k,
        cap=cap,
        cap_mode=cap_mode,
        total=total,
        log_total=log_total,
        paper_bound_log=bound_log,
        within_bound=log_total <= bound_log,
        regime_shadow=shadow,
    )


def dirichlet_mean_window(x: int, y: int) -> float:
    """Classical main-term prediction for sum of tau_2 over (x, x+y]:
    difference of t log t + (2 gamma_EM - 1) t at the endpoints."""

    def main(t: float) -> float:
        return t * log(t) + (2.0 * np.euler_gamma - 1.0) * t

    return main(float(x + y)) - main(float(x))


def square_harmonic_sum(k: int, cfg: EulerProductConfig = DEFAULT_CONFIG) -> float:
    """log of sum over m of tau_k(m^2)/m^2, via the Euler product of the
    local factors 1 + sum_j tau_k(p^{2j}) p^{-2j}.

    Local factors are summed until the term drops below 1e-18 relative;
    primes beyond the truncation contribute ~ C(k+1, 2) * sum p^-2.
    """
    if k < 2:
        raise SieveRangeError(f"k={k} must be >= 2")
    p, _ = _prime_arrays_divisors(cfg.prime_limit)
    local = np.ones(len(p))
    j = 1
    while True:
        term = float(comb(2 * j + k - 1, k - 1)) * np.exp(-2.0 * j * np.log(p))
        local += term
        if float(np.max(term / local)) < 1e-18:
            break
        j += 1
        if j > 600:
            raise ConvergenceError(f"square-harmonic local factor stalled at k={k}")
    ln_p = log(cfg.prime_limit)
    tail = float(comb(k + 1, 2)) * float(exp1(ln_p))
    return float(np.sum(np.log(local))) + tail


_div_prime_cache: dict[int, np.ndarray] = {}


def _prime_arrays_divisors(limit: int):
    got = _div_prime_cache.get(limit)
    if got is None:
        if len(_div_prime_cache) > 4:
            _div_prime_cache.clear()
        got = sieve.cached_prime_table(limit).primes.astype(np.float64)
        _div_prime_cache[limit] = got
    return got, None


def square_harmonic_partial(k: int, m_limit: int, segment_size: int = DEFAULT_SEGMENT) -> float:
    """Direct partial sum of tau_k(m^2)/m^2 for m <= m_limit (oracle side).

    Streams a multiplicative sieve; exactness of individual tau values is
    not required here, only a faithful partial sum.
    """
    table = sieve.cached_prime_table(max(isqrt(m_limit) + 1, 3))
    total_pieces = []
    max_e = int(math.log2(m_limit)) + 1
    ratio_by_e = np.array(
        [1.0] + [comb(2 * e + k - 1, k - 1) / comb(2 * (e - 1) + k - 1, k - 1) for e in range(1, max_e + 1)]
    )
    for seg in sieve.iter_factored_segments(0, m_limit, table, segment_size):
        nvals = seg.values()
        count = len(seg)
        vals = np.ones(count)
        n_primes = int(np.searchsorted(table.primes, seg.sieve_root, side="right"))
        for p in table.primes[:n_primes].tolist():
            start = (seg.lo // p + 1) * p
            if start > seg.hi:
                continue
            idx = np.arange(start - seg.lo - 1, count, p)
            rem = nvals[idx] // np.uint64(p)
            e = np.ones(len(idx), dtype=np.int64)
            live = rem % np.uint64(p) == 0
            while live.any():
                rem[live] //= np.uint64(p)
                e[live] += 1
                live &= rem % np.uint64(p) == 0
            cum = np.cumprod(ratio_by_e[1:])  # tau_k(p^{2e}) for e = 1..max
            vals[idx] *= cum[e - 1]
        vals[seg.large_factor > 1] *= float(comb(k + 1, k - 1))
        total_pieces.append(float(np.sum(vals / nvals.astype(np.float64) ** 2)))
    return math.fsum(total_pieces)
