"""Structural minorant counts: products of a small smooth part and a rough
large part that land inside S_nu(x, x+y].

The prime-times-small-divisor sum is evaluated by factoring the interval
once and counting qualifying (divisor, prime) pairs per integer, so the
unclamped parameter values stay feasible.  The broad smooth/rough variant
enumerates smooth divisors explicitly and therefore needs desk-scale caps
on tau and t well below the asymptotic formula values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import exp, isqrt, log

import numpy as np

from . import sieve
from .counts import _rough_mask
from .scales import NU_CAP, log3x, nu_scale, script_l
from .sieve import DEFAULT_SEGMENT, PrimeTable, SieveRangeError


class ParameterError(ValueError):
    """Structural parameters outside the range where the sum makes sense."""


@dataclass(frozen=True)
class ScaleParams:
    """Derived scalars for the minorant construction at (x, nu, a).

    Two variants of the smooth-part exponent are in circulation; the
    sqrt-damped one (lambda_plus) drives tau here, the linear one
    (lambda_plus_alt) is exposed for diagnostics only.
    """

    x: int
    nu: int
    a: float
    scale: float  # nu_scale(nu, log x)
    lambda_plus: float  # log x / sqrt(log3 x)
    lambda_plus_alt: float  # log x / log3 x
    tau: float  # exp(lambda_plus)
    ell: float  # nu (log scale)^2 / scale
    t: float  # exp(log x / (ell * log3 x))
    script_la: float  # log x / (log2 x)^a


def scale_params(x: int, nu: int, a: float) -> ScaleParams:
    if x < 16:
        raise ParameterError(f"x={x} too small: iterated logs undefined")
    if nu < 1:
        raise ParameterError(f"nu={nu} must be >= 1")
    log_x = log(x)
    scale = nu_scale(nu, log_x)
    if scale <= 0.0:
        raise ParameterError(
            f"nu log(nu+1) >= log x at nu={nu}, x={x}: scale {scale:.4f} <= 0"
        )
    l3 = log3x(log_x)
    lam = log_x / math.sqrt(l3)
    ell = nu * log(scale) ** 2 / scale
    return ScaleParams(
        x=x,
        nu=nu,
        a=a,
        scale=scale,
        lambda_plus=lam,
        lambda_plus_alt=log_x / l3,
        tau=exp(lam),
        ell=ell,
        t=exp(log_x / (ell * l3)) if ell > 0 else float("inf"),
        script_la=script_l(log_x, a),
    )


@dataclass(frozen=True)
class PairCount:
    """Literal (divisor, prime) pair count with its distinct-target shadow."""

    nu: int
    pairs: int  # the double sum itself
    distinct: int  # distinct n in (x, x+y] hit at least once
    distinct_in_s_nu: int  # of those, the ones with omega(n) = nu


def _pair_pass(
    x: int,
    y: int,
    tau: float,
    table: PrimeTable,
    nu_mark: int | None,
    segment_size: int,
):
    """Pair counts by omega(n/p) over all prime divisors p with n/p <= tau.

    Returns (histogram over omega(m), distinct hits, distinct hits in S_nu)
    where the distinct tallies are tracked only for nu_mark.
    """
    hist = np.zeros(NU_CAP + 2, dtype=np.int64)
    distinct = 0
    distinct_s = 0
    tau_int = np.uint64(min(int(tau), x + y))
    for seg in sieve.iter_factored_segments(x, y, table, segment_size):
        nvals = seg.values()
        count = len(seg)
        marked = (
            np.zeros(count, dtype=bool) if nu_mark is not None else None
        )
        n_primes = int(np.searchsorted(table.primes, seg.sieve_root, side="right"))
        for p in table.primes[:n_primes].tolist():
            start = (seg.lo // p + 1) * p
            if start > seg.hi:
                continue
            idx = np.arange(start - seg.lo - 1, count, p)
            m = nvals[idx] // np.uint64(p)
            sel = m <= tau_int
            if not sel.any():
                continue
            exact_once = (m[sel] % np.uint64(p)) != 0
            w = seg.omega[idx][sel].astype(np.int64) - exact_once
            hist += np.bincount(w, minlength=NU_CAP + 2)[: NU_CAP + 2]
            if marked is not None:
                hit = idx[sel][w == nu_mark - 1]
                marked[hit] = True
        big = seg.large_factor > 1
        m = nvals[big] // seg.large_factor[big]
        sel = m <= tau_int
        w = seg.omega[big][sel].astype(np.int64) - 1  # large factor is simple
        hist += np.bincount(w, minlength=NU_CAP + 2)[: NU_CAP + 2]
        if marked is not None:
            hit = np.flatnonzero(big)[sel][w == nu_mark - 1]
            marked[hit] = True
            distinct += int(marked.sum())
            distinct_s += int((marked & (seg.omega == nu_mark)).sum())
    return hist, distinct, distinct_s


def minorant_prime(
    x: int,
    y: int,
    nu: int,
    tau_cap: int | None = None,
    table: PrimeTable | None = None,
    force: bool = False,
    segment_size: int = DEFAULT_SEGMENT,
) -> PairCount:
    """The prime-pair minorant: pairs (m, p) with omega(m) = nu-1, m <= tau
    and m*p in (x, x+y].

    At nu=1 only m=1 qualifies, so this is exactly the prime count of the
    interval.
    """
    if nu < 1:
        raise ParameterError(f"nu={nu} must be >= 1")
    tau = float(scale_params(x, nu, 4.5).tau if tau_cap is None else tau_cap)
    if tau >= x and not force:
        raise ParameterError(
            f"tau={tau:.4g} >= x={x}: small-divisor structure degenerate "
            "(clamp tau or pass force=True)"
        )
    table = table if table is not None else sieve.table_for_interval(x, y)
    hist, distinct, distinct_s = _pair_pass(x, y, tau, table, nu, segment_size)
    return PairCount(
        nu=nu,
        pairs=int(hist[nu - 1]),
        distinct=distinct,
        distinct_in_s_nu=distinct_s,
    )


def minorant_prime_histogram(
    x: int,
    y: int,
    tau: float,
    table: PrimeTable | None = None,
    segment_size: int = DEFAULT_SEGMENT,
) -> np.ndarray:
    """Pair counts for every nu at once: entry nu is the minorant at nu."""
    table = table if table is not None else sieve.table_for_interval(x, y)
    hist, _, _ = _pair_pass(x, y, tau, table, None, segment_size)
    out = np.zeros(NU_CAP + 1, dtype=np.int64)
    out[1:] = hist[: NU_CAP]
    return out


@dataclass(frozen=True)
class SharpCount:
    """Broad minorant result with clamp/degeneracy bookkeeping."""

    nu: int
    count: int
    degenerate: bool  # ell < 1: the outer sum is empty by convention
    clamps_active: bool
    tau: float
    t: float
    w_max: int


def smooth_members(k: int, tau: float, t: float, table: PrimeTable):
    """All m <= tau with exactly k distinct prime factors, all <= t."""
    if tau < 1.0:
        return []
    limit = int(np.searchsorted(table.primes, int(t), side="right"))
    primes = table.primes[:limit].tolist()
    out: list[int] = []

    def rec(start: int, left: int, acc: int):
        if left == 0:
            out.append(acc)
            return
        for i in range(start, len(primes)):
            p = primes[i]
            val = acc * p
            if val > tau:
                break
            while val <= tau:
                rec(i + 1, left - 1, val)
                val *= p

    rec(0, k, 1)
    return sorted(out)


_SMOOTH_ENUM_CAP = 2_000_000


def minorant_sharp(
    x: int,
    y: int,
    nu: int,
    a: float = 4.5,
    tau_cap: int | None = None,
    t_cap: int | None = None,
    table: PrimeTable | None = None,
    segment_size: int = DEFAULT_SEGMENT,
) -> SharpCount:
    """Triple sum over w <= ell, smooth m with omega(m) = nu - w, and rough
    n in (x/m, (x+y)/m] with omega(n) = w and all prime factors > t."""
    params = scale_params(x, nu, a)
    clamped = tau_cap is not None or t_cap is not None
    tau = float(tau_cap) if tau_cap is not None else params.tau
    t = float(t_cap) if t_cap is not None else params.t
    w_max = min(int(params.ell), nu)
    if params.ell < 1.0:
        return SharpCount(nu, 0, True, clamped, tau, t, 0)
    if tau >= x and not clamped:
        raise ParameterError(
            f"tau={tau:.4g} >= x={x}: clamp tau/t for desk-scale evaluation"
        )
    table = table if table is not None else sieve.table_for_interval(x, y)
    t_int = int(t)
    total = 0
    for w in range(1, w_max + 1):
        members = smooth_members(nu - w, tau, t, table)
        if len(members) > _SMOOTH_ENUM_CAP:
            raise ParameterError(
                f"{len(members)} smooth divisors at tau={tau:.3g}, t={t:.3g}: "
                "cap the parameters"
            )
        for m in members:
            lo2, hi2 = x // m, (x + y) // m
            if hi2 <= lo2:
                continue
            for seg in sieve.iter_factored_segments(
                lo2, hi2 - lo2, table, segment_size
            ):
                total += int(
                    np.count_nonzero(
                        (seg.omega == w) & _rough_mask(seg, t_int)
                    )
                )
    return SharpCount(nu, total, False, clamped, tau, t, w_max)
