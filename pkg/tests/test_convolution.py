import math

import numpy as np
import pytest

import bruteforce
from nufactor import convolution, sieve
from nufactor.convolution import (
    BINOMIAL_PRODUCT_BASE,
    check_support,
    combinatorial_product_max,
    convolved_von_mangoldt,
    dirichlet_convolve,
    prime_tuple_table,
    rough_convolution_sum,
    theta_bar_table,
    unit_table,
    von_mangoldt_table,
)


def test_von_mangoldt_values():
    t = von_mangoldt_table(100)
    assert math.isclose(t[8], math.log(2))
    assert t[6] == 0.0
    assert t[1] == 0.0
    assert math.isclose(t[49], math.log(7))


def test_von_mangoldt_chebyshev_psi():
    # sum of Lambda(n) for n <= 1e6 is within 0.2% of 1e6
    t = von_mangoldt_table(10**6)
    psi = float(np.sum(t.values))
    assert abs(psi / 10**6 - 1.0) < 0.002


def test_theta_bar_values():
    t = theta_bar_table(100)
    assert t[7] == 1.0
    assert t[49] == 0.5
    assert t[64] == 1.0 / 6.0
    assert t[12] == 0.0


def test_convolve_f2_at_6():
    lam = von_mangoldt_table(10)
    f2 = dirichlet_convolve(lam, lam)
    assert math.isclose(f2[6], 2.0 * math.log(2) * math.log(3), rel_tol=1e-12)


def test_convolve_identity():
    lam = von_mangoldt_table(500)
    same = dirichlet_convolve(lam, unit_table(500))
    assert np.allclose(same.values, lam.values, rtol=0, atol=0)


def test_convolve_limit_mismatch():
    with pytest.raises(Exception):
        dirichlet_convolve(von_mangoldt_table(10), von_mangoldt_table(20))


def test_f3_matches_triple_loop():
    n = 10**4
    lam = von_mangoldt_table(n)
    f3 = convolved_von_mangoldt(3, n)[3]
    brute = np.zeros(n + 1)
    lv = lam.values
    for a in range(2, n + 1):
        if lv[a] == 0.0:
            continue
        for b in range(2, n // a + 1):
            if lv[b] == 0.0:
                continue
            for c in range(2, n // (a * b) + 1):
                if lv[c] != 0.0:
                    brute[a * b * c] += lv[a] * lv[b] * lv[c]
    assert np.allclose(f3.values, brute, rtol=1e-11, atol=1e-11)


def test_convolution_associative_commutative():
    n = 2000
    f = von_mangoldt_table(n)
    g = theta_bar_table(n)
    h = unit_table(n)
    h.values[2::2] = 1.0  # arbitrary dense table
    left = dirichlet_convolve(dirichlet_convolve(f, g), h)
    right = dirichlet_convolve(f, dirichlet_convolve(g, h))
    assert np.allclose(left.values, right.values, rtol=1e-12)
    assert np.allclose(
        dirichlet_convolve(f, g).values, dirichlet_convolve(g, f).values, rtol=0
    )


def test_support_law_v1():
    rep = check_support(1, 10**4)
    assert rep.violations == 0
    assert rep.squarefree_mismatches == 0


def test_support_law_v2_exhaustive():
    rep = check_support(2, 10**4)
    assert rep.violations == 0
    assert rep.squarefree_mismatches == 0


def test_support_nesting_and_nonnegativity():
    n = 10**4
    table = sieve.table_for_interval(0, n)
    ladder = convolved_von_mangoldt(4, n, table)
    fi = sieve.sieve_interval(0, n, table)
    for v in (2, 3, 4):
        vals = ladder[v].values[1:]
        assert np.all(vals >= 0.0)
        assert np.all(fi.big_omega[vals > 0] >= v)


def test_squarefree_value_is_factorial_times_logs(oracle_1e6, table_1e6):
    # F_v(n) = v! * prod log p_i on squarefree n with omega(n) = v
    n, v = 10**5, 3
    f3 = convolved_von_mangoldt(v, n, table_1e6)[v]
    stats = bruteforce.factor_stats(0, n)
    sf = (stats.omega == stats.big_omega) & (stats.omega == v)
    idx = np.flatnonzero(sf)
    logs = np.log(stats.flat_primes.astype(np.float64))
    for i in idx:
        lo, hi = stats.offsets[i], stats.offsets[i + 1]
        expect = math.factorial(v) * float(np.prod(logs[lo:hi]))
        assert math.isclose(f3[int(i) + 1], expect, rel_tol=1e-9)


def test_prime_tuple_table_squarefree_support(oracle_1e6, table_1e6):
    # squarefree restriction of the k-fold table picks out S_k exactly,
    # with value k! there
    n, k = 10**5, 3
    pk = prime_tuple_table(k, n, table_1e6)
    stats_omega = oracle_1e6.omega[:n]
    sf = oracle_1e6.omega[:n] == oracle_1e6.big_omega[:n]
    vals = pk.values[1:]
    hit = sf & (stats_omega == k)
    assert np.allclose(vals[hit], math.factorial(k), rtol=1e-12)
    assert np.all(vals[sf & (stats_omega != k)] == 0.0)


def test_rough_sum_counts_rough_squarefree(oracle_1e6, table_1e6):
    # sum over squarefree rough n of P_v(n) = v! * |squarefree A_v(x; z)|
    x, v, z = 10**5, 2, 30
    pk = prime_tuple_table(v, x, table_1e6)
    sf = oracle_1e6.omega[:x] == oracle_1e6.big_omega[:x]
    rough = oracle_1e6.lpf[:x] > z
    hit = sf & rough & (oracle_1e6.omega[:x] == v)
    direct = float(np.sum(pk.values[1:][sf & rough]))
    # non-squarefree rough terms also contribute; restrict the table side
    restricted = float(np.sum(np.where(sf & rough, pk.values[1:], 0.0)))
    assert math.isclose(restricted, math.factorial(v) * int(hit.sum()), rel_tol=1e-12)
    assert direct == restricted


def test_rough_convolution_sum_long_and_short(table_1e6):
    x, v, z = 10**5, 1, 1
    long_sum = rough_convolution_sum(v, z, x, table=table_1e6)
    # sum over prime powers p^k <= x of 1/k
    expect = 0.0
    for p in sieve.build_prime_table(x).primes.tolist():
        pk, k = p, 1
        while pk <= x:
            expect += 1.0 / k
            pk *= p
            k += 1
    assert math.isclose(long_sum, expect, rel_tol=1e-12)
    short = rough_convolution_sum(v, z, 60_000, 40_000, table=table_1e6)
    a = rough_convolution_sum(v, z, 10**5, table=table_1e6)
    b = rough_convolution_sum(v, z, 60_000, table=table_1e6)
    assert math.isclose(short, a - b, rel_tol=1e-12)


def test_rough_convolution_sum_v0():
    assert rough_convolution_sum(0, 5, 100) == 1.0  # only n = 1
    assert rough_convolution_sum(0, 5, 100, 50) == 0.0


def test_combinatorial_product_v1_v2():
    c1 = combinatorial_product_max(1)
    assert c1.value == 1.0
    c2 = combinatorial_product_max(2)
    assert c2.value == 4.0
    assert c2.bound_ok and 4.0 <= BINOMIAL_PRODUCT_BASE**2


def test_combinatorial_product_bound_up_to_40():
    for v in range(1, 41):
        cb = combinatorial_product_max(v)
        assert cb.bound_ok, f"bound violated at v={v}"


def test_combinatorial_constraints_respected():
    cb = combinatorial_product_max(12)
    w, *a = cb.argmax
    assert w + sum(a) <= 12
    assert all(a[j] <= 12 // 2**j for j in range(len(a)))


def test_mean_bound_shadow_kappa_150(table_1e6):
    # sum of F_v(n)/n over z-rough n <= 1e6 against v (150 log x / v)^v
    x = 10**6
    fi = sieve.sieve_interval(0, x, table_1e6)
    ladder = convolved_von_mangoldt(8, x, table_1e6)
    ns = np.arange(1, x + 1, dtype=np.float64)
    for v in range(3, 9):
        z = 30 * v
        rough = fi.least_prime_factor > z
        lhs = float(np.sum(ladder[v].values[1:][rough] / ns[rough]))
        rhs = v * (150.0 * math.log(x) / v) ** v
        assert lhs <= rhs
