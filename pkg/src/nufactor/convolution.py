"""Dirichlet-convolution tables: the von Mangoldt ladder and its almost-
indicator variant, their iterated self-convolutions, rough-restricted sums
and the combinatorial binomial product bound.

Tables carry plain float64 values; every downstream use is an inequality or
ratio check with generous tolerances, so exact rationals would buy nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb, log

import numpy as np

from . import sieve
from .counts import _rough_mask
from .sieve import DEFAULT_SEGMENT, PrimeTable, SieveRangeError

TABLE_LIMIT_MAX = 10**8


@dataclass(frozen=True)
class ArithmeticTable:
    """Values of a named arithmetic function on 1..limit (index 0 unused)."""

    limit: int
    name: str
    values: np.ndarray  # float64, length limit + 1

    def __getitem__(self, n: int) -> float:
        return float(self.values[n])

    def nonzero_indices(self) -> np.ndarray:
        return np.flatnonzero(self.values)


def _check_limit(limit: int) -> None:
    if not 1 <= limit <= TABLE_LIMIT_MAX:
        raise SieveRangeError(f"table limit {limit} outside [1, {TABLE_LIMIT_MAX}]")


def unit_table(limit: int) -> ArithmeticTable:
    """Convolution identity: 1 at n=1, else 0."""
    _check_limit(limit)
    v = np.zeros(limit + 1)
    v[1] = 1.0
    return ArithmeticTable(limit, "unit", v)


def _prime_powers(limit: int, table: PrimeTable | None):
    if table is None or table.limit < limit:
        table = sieve.cached_prime_table(max(limit, 3))
    for p in table.primes[table.primes <= limit].tolist():
        pk, k = p, 1
        while pk <= limit:
            yield p, pk, k
            pk *= p
            k += 1


def von_mangoldt_table(limit: int, table: PrimeTable | None = None) -> ArithmeticTable:
    """log p at prime powers p^k, zero elsewhere."""
    _check_limit(limit)
    v = np.zeros(limit + 1)
    for p, pk, _ in _prime_powers(limit, table):
        v[pk] = log(p)
    return ArithmeticTable(limit, "vonMangoldt", v)


def theta_bar_table(limit: int, table: PrimeTable | None = None) -> ArithmeticTable:
    """The almost-indicator of the primes: 1/k at p^k, zero elsewhere."""
    _check_limit(limit)
    v = np.zeros(limit + 1)
    for _, pk, k in _prime_powers(limit, table):
        v[pk] = 1.0 / k
    return ArithmeticTable(limit, "thetaBar", v)


def dirichlet_convolve(f: ArithmeticTable, g: ArithmeticTable) -> ArithmeticTable:
    """(f*g)(n) = sum over d|n of f(d) g(n/d), via the multiples loop.

    Iterates over the sparser factor's support, so convolving with the
    von Mangoldt ladder costs about limit * loglog(limit) operations.
    """
    if f.limit != g.limit:
        raise SieveRangeError(f"table limits differ: {f.limit} vs {g.limit}")
    n = f.limit
    if len(g.nonzero_indices()) > len(f.nonzero_indices()):
        f, g = g, f
    out = np.zeros(n + 1)
    fv = f.values
    for k in g.nonzero_indices().tolist():
        if k == 0:
            continue
        gk = g.values[k]
        top = n // k
        out[k : k * top + 1 : k] += gk * fv[1 : top + 1]
    return ArithmeticTable(n, f"({f.name}*{g.name})", out)


def convolved_von_mangoldt(v: int, limit: int, table: PrimeTable | None = None):
    """The v-fold self-convolution ladder; index j holds the j-fold table."""
    lam = von_mangoldt_table(limit, table)
    ladder = [unit_table(limit), lam]
    for _ in range(2, v + 1):
        ladder.append(dirichlet_convolve(ladder[-1], lam))
    return ladder


def prime_tuple_table(k: int, limit: int, table: PrimeTable | None = None):
    """k-fold self-convolution of the almost-indicator; k=0 is the unit."""
    tb = theta_bar_table(limit, table)
    out = unit_table(limit)
    for _ in range(k):
        out = dirichlet_convolve(out, tb)
    return out


@dataclass(frozen=True)
class SupportReport:
    v: int
    limit: int
    violations: int  # nonzero F_v outside {omega <= v, Omega >= v}
    squarefree_mismatches: int  # squarefree n where nonzero-ness != (omega == v)


def check_support(
    v: int, limit: int, table: PrimeTable | None = None
) -> SupportReport:
    """Verify the support law of the v-fold ladder table.

    Nonzero values must have omega <= v and Omega >= v; on squarefree n the
    support is exactly omega = v.
    """
    if v > 6 or limit > 10**6:
        raise SieveRangeError("support check capped at v <= 6, limit <= 1e6")
    table = table if table is not None else sieve.table_for_interval(0, limit)
    fv = convolved_von_mangoldt(v, limit, table)[v]
    fi = sieve.sieve_interval(0, limit, table)
    nz = fv.values[1:] != 0.0
    bad = nz & ~((fi.omega <= v) & (fi.big_omega >= v))
    sf_bad = fi.squarefree & (nz != (fi.omega == v))
    return SupportReport(
        v=v,
        limit=limit,
        violations=int(bad.sum()),
        squarefree_mismatches=int(sf_bad.sum()),
    )


def rough_convolution_sum(
    v: int,
    z: int,
    x: int,
    y: int | None = None,
    table: PrimeTable | None = None,
) -> float:
    """Sum of the k-fold almost-indicator over z-rough integers.

    Long sum over n <= x when y is None, else the short difference over
    (x, x+y].  Table-backed: the whole range is materialized.
    """
    top = x if y is None else x + y
    _check_limit(top)
    table = table if table is not None else sieve.table_for_interval(0, top)
    pk = prime_tuple_table(v, top, table)
    fi = sieve.sieve_interval(0, top, table)
    rough = _rough_mask(fi, z)
    vals = np.where(rough, pk.values[1:], 0.0)
    if y is None:
        return float(np.sum(vals[:x]))
    return float(np.sum(vals[x : x + y]))


@dataclass(frozen=True)
class CombinatorialBound:
    v: int
    value: float
    argmax: tuple  # (w, a_0..a_K) attaining the maximum
    bound: float  # (16 sqrt(2e))^v
    bound_ok: bool


BINOMIAL_PRODUCT_BASE = 16.0 * math.sqrt(2.0 * math.e)


def combinatorial_product_max(v: int) -> CombinatorialBound:
    """Maximum of C(v,w) * prod_k C(v,a_k) over w + sum a_k <= v with
    a_j <= v/2^j, for K = floor(log v / log 2) extra slots."""
    if not 1 <= v <= 40:
        raise ValueError(f"v={v} outside the enumerable range [1, 40]")
    K = int(math.floor(log(v) / log(2.0)))
    best = 0
    best_arg = ()

    def rec(j: int, budget: int, acc: int, chosen: tuple):
        nonlocal best, best_arg
        if j > K:
            if acc > best:
                best, best_arg = acc, chosen
            return
        cap = min(budget, v >> j)  # a_j <= v / 2^j
        for a in range(cap + 1):
            rec(j + 1, budget - a, acc * comb(v, a), chosen + (a,))

    for w in range(v + 1):
        rec(0, v - w, comb(v, w), (w,))
    bound = BINOMIAL_PRODUCT_BASE**v
    return CombinatorialBound(
        v=v,
        value=float(best),
        argmax=best_arg,
        bound=bound,
        bound_ok=float(best) <= bound,
    )
