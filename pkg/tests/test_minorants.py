import math

import pytest

import bruteforce
from nufactor import counts, minorants, sieve
from nufactor.minorants import (
    ParameterError,
    minorant_prime,
    minorant_sharp,
    scale_params,
    smooth_members,
)
from nufactor.scales import nu_scale


def brute_minorant_prime(x, y, nu, tau):
    total = 0
    for m in range(1, int(tau) + 1):
        if bruteforce.omega(m) == nu - 1:
            total += len(bruteforce.primes_between(x // m, (x + y) // m))
    return total


def brute_minorant_sharp(x, y, nu, tau, t, w_max):
    total = 0
    for w in range(1, min(w_max, nu) + 1):
        for m in range(1, int(tau) + 1):
            fm = bruteforce.factorize(m)
            if len(fm) != nu - w or any(p > t for p, _ in fm):
                continue
            for n in range(x // m + 1, (x + y) // m + 1):
                fn = bruteforce.factorize(n)
                if len(fn) == w and all(p > t for p, _ in fn):
                    total += 1
    return total


def test_scale_params_formulas():
    # log x = 100 exactly is awkward for integer x; check at x = 1e12
    sp = scale_params(10**12, 2, 4.5)
    lx = math.log(10**12)
    assert math.isclose(sp.scale, math.log(lx / (2 * math.log(3))))
    assert math.isclose(sp.tau, math.exp(sp.lambda_plus))
    # t ** (ell * log3 x) == x in exact arithmetic
    assert math.isclose(math.log(sp.t) * sp.ell * math.log(math.log(lx)), lx,
                        rel_tol=1e-12)


def test_scale_params_script_la_decreasing_in_a():
    vals = [scale_params(10**10, 3, a).script_la for a in (4.1, 4.5, 5.0)]
    assert vals == sorted(vals, reverse=True)


def test_scale_params_range_error():
    with pytest.raises(ParameterError):
        scale_params(10**6, 12, 4.5)  # nu log(nu+1) > log x


def test_minorant_prime_nu1_is_prime_count(table_1e6):
    x, y = 500_000, 20_000
    pc = minorant_prime(x, y, 1, tau_cap=10, table=table_1e6)
    assert pc.pairs == len(bruteforce.primes_between(x, x + y))


def test_minorant_prime_matches_brute_force(table_1e6):
    for x, y, nu, tau in ((10**6 - 10**4, 10**4, 2, 100), (300_000, 5_000, 3, 400)):
        pc = minorant_prime(x, y, nu, tau_cap=tau, table=table_1e6)
        assert pc.pairs == brute_minorant_prime(x, y, nu, tau)


def test_minorant_prime_distinct_at_most_pairs(table_1e6):
    pc = minorant_prime(400_000, 50_000, 3, tau_cap=4000, table=table_1e6)
    assert pc.distinct_in_s_nu <= pc.distinct <= pc.pairs
    h = counts.omega_histogram(400_000, 50_000, table=table_1e6)
    assert pc.distinct_in_s_nu <= h[3]


def test_minorant_prime_unclamped_requires_large_x(table_1e6):
    # tau >= x below e^(e^e): must refuse unless forced
    with pytest.raises(ParameterError):
        minorant_prime(10**6 - 10**4, 10**4, 2, table=table_1e6)
    forced = minorant_prime(10**6 - 10**4, 10**4, 2, table=table_1e6, force=True)
    assert forced.pairs > 0


def test_minorant_prime_histogram_consistent(table_1e6):
    x, y, tau = 700_000, 30_000, 900
    hist = minorants.minorant_prime_histogram(x, y, tau, table=table_1e6)
    for nu in (1, 2, 3, 4):
        pc = minorant_prime(x, y, nu, tau_cap=tau, table=table_1e6)
        assert hist[nu] == pc.pairs


def test_smooth_members_small():
    table = sieve.build_prime_table(100)
    # m <= 100 with exactly 2 distinct primes, all <= 5
    got = smooth_members(2, 100.0, 5.0, table)
    expect = sorted(
        m
        for m in range(2, 101)
        if len(bruteforce.factorize(m)) == 2
        and all(p <= 5 for p, _ in bruteforce.factorize(m))
    )
    assert got == expect
    assert smooth_members(0, 10.0, 5.0, table) == [1]


def test_minorant_sharp_degenerate_when_ell_below_1(table_1e6):
    # nu=4 at x ~ 9e5 gives ell ~ 0.41
    res = minorant_sharp(9 * 10**5, 5 * 10**4, 4, tau_cap=200, t_cap=30,
                         table=table_1e6)
    assert res.degenerate and res.count == 0


def test_minorant_sharp_matches_brute_force(table_1e6):
    x, y, nu = 9 * 10**5, 5 * 10**4, 6
    res = minorant_sharp(x, y, nu, tau_cap=200, t_cap=7, table=table_1e6)
    assert not res.degenerate
    assert res.count == brute_minorant_sharp(x, y, nu, 200, 7, res.w_max)
    assert res.count > 0


def test_minorant_sharp_never_exceeds_interval_count(table_1e6):
    x, y, nu = 6 * 10**5, 10**5, 5
    res = minorant_sharp(x, y, nu, tau_cap=500, t_cap=13, table=table_1e6)
    h = counts.omega_histogram(x, y, table=table_1e6)
    assert 0 < res.count <= h[nu]


def test_minorant_sharp_triples_are_injective(table_1e6):
    # every (w, m, n) triple lands on a distinct product m*n in S_nu:
    # collecting the products must produce no duplicates
    x, y, nu, tau, t = 6 * 10**5, 10**5, 5, 500, 13
    res = minorant_sharp(x, y, nu, tau_cap=tau, t_cap=t, table=table_1e6)
    seen = set()
    for w in range(1, res.w_max + 1):
        for m in smooth_members(nu - w, tau, t, table_1e6):
            for n in range(x // m + 1, (x + y) // m + 1):
                fn = bruteforce.factorize(n)
                if len(fn) == w and all(p > t for p, _ in fn):
                    prod = m * n
                    assert prod not in seen
                    assert x < prod <= x + y
                    assert bruteforce.omega(prod) == nu
                    seen.add(prod)
    assert len(seen) == res.count


def test_minorant_sharp_telescopes(table_1e6):
    # fixed parameter set: count over (x, x+y1+y2] splits at x+y1
    x, y1, y2, nu, tau, t = 6 * 10**5, 40_000, 60_000, 5, 500, 13
    whole = minorant_sharp(x, y1 + y2, nu, tau_cap=tau, t_cap=t, table=table_1e6)
    first = minorant_sharp(x, y1, nu, tau_cap=tau, t_cap=t, table=table_1e6)
    second = minorant_sharp(x + y1, y2, nu, tau_cap=tau, t_cap=t, table=table_1e6)
    assert whole.count == first.count + second.count


def test_capture_ratio_trend_toward_one():
    # |M'/pi - 1| shrinks as x grows, nu fixed (y=1e6 keeps this quick;
    # below x ~ 1e8 the pair sum saturates and the trend has not started)
    xs = (10**8, 10**9, 10**10)
    ratios = {}
    for x in xs:
        table = sieve.table_for_interval(x, 10**6)
        tau = scale_params(x, 3, 4.5).tau
        hist = counts.omega_histogram(x, 10**6, table=table)
        mh = minorants.minorant_prime_histogram(x, 10**6, tau, table=table)
        ratios[x] = {nu: mh[nu] / hist[nu] for nu in (3, 4)}
    for nu in (3, 4):
        devs = [abs(ratios[x][nu] - 1.0) for x in xs]
        assert devs[0] > devs[1] > devs[2]
