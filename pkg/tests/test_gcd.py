import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zrl.errors import ConfigurationError, DomainError
from zrl.gcd import (
    ConstructedSet,
    ConstructionParams,
    SetElement,
    block_cardinality,
    block_from_elements,
    brute_force_gamma,
    build_construction,
    enumerate_block_pairs,
    gal_sum,
    gal_sum_blocks,
    gamma_half_reference,
    gamma_lower_bound,
    gcd_lcm_rational,
    h_functional,
    jordan_totient,
    optimize_h,
    sift_chain_check,
    spectral_norm,
)


def divisors(n):
    return [d for d in range(1, n + 1) if n % d == 0]


def naive_gal(M, sigma):
    return math.fsum((math.gcd(m, n) / math.lcm(m, n)) ** sigma for m in M for n in M)


sets = st.sets(st.integers(1, 2000), min_size=1, max_size=25).map(sorted)


def test_set_element_roundtrip():
    for n in (1, 2, 12, 360, 2**10 * 7, 999983):
        assert SetElement.from_int(n).to_int() == n
    with pytest.raises(DomainError):
        SetElement.from_int(0)
    with pytest.raises(DomainError):
        SetElement(((3, 1), (2, 1)))


def test_gcd_lcm_rational_examples():
    assert gcd_lcm_rational(1, 1, 1, 1, 6) == (6, 6)
    assert gcd_lcm_rational(2, 3, 4, 1, 6) == (4, 24)
    with pytest.raises(DomainError, match="gcd"):
        gcd_lcm_rational(2, 4, 1, 1, 8)
    with pytest.raises(DomainError, match="divide"):
        gcd_lcm_rational(1, 5, 1, 1, 6)


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 10**6), st.integers(1, 10**6), st.integers(1, 10**6), st.integers(1, 10**6), st.integers(1, 50))
def test_gcd_lcm_rational_random(a, b, a2, b2, k):
    g = math.gcd(a, b)
    a, b = a // g, b // g
    g = math.gcd(a2, b2)
    a2, b2 = a2 // g, b2 // g
    N = math.lcm(b, b2) * k
    gcd_lcm_rational(a, b, a2, b2, N)


def test_gal_sum_examples():
    assert gal_sum([7], 0.5) == 1.0
    assert gal_sum([1, 2], 1.0) == pytest.approx(3.0, rel=1e-15)
    assert gal_sum([1, 2], 0.5) == pytest.approx(2 + math.sqrt(2), rel=1e-15)
    with pytest.raises(DomainError):
        gal_sum([2, 2], 0.5)
    with pytest.raises(DomainError):
        gal_sum([1, 2], 1.5)
    with pytest.raises(ConfigurationError):
        gal_sum(range(1, 12), 0.5, max_size=10)


@settings(max_examples=60, deadline=None)
@given(sets, st.floats(0.05, 1.0))
def test_gal_sum_properties(M, sigma):
    S = gal_sum(M, sigma)
    assert S == pytest.approx(naive_gal(M, sigma), rel=1e-12)
    assert S >= len(M) * (1 - 1e-15)
    assert gal_sum(M, min(1.0, sigma + 0.1)) <= S * (1 + 1e-15)
    assert spectral_norm(M, sigma) * len(M) >= S * (1 - 1e-10)


@settings(max_examples=40, deadline=None)
@given(st.sets(st.integers(1, 500), min_size=1, max_size=15).map(sorted), st.floats(0.1, 1.0))
def test_gal_sum_invariant_under_coprime_shift(M, sigma):
    els = [SetElement.from_int(m) for m in M]
    shift = SetElement(((1009, 3), (1013, 1)))
    assert gal_sum([e * shift for e in els], sigma) == gal_sum(els, sigma)


def test_spectral_norm():
    assert spectral_norm([5], 0.7) == pytest.approx(1.0)
    assert spectral_norm([1, 2], 1.0) == pytest.approx(1.5, rel=1e-11)


def test_gal_sum_blocks():
    assert gal_sum_blocks([[2], [3]], 1.0) == 1.0
    assert gal_sum_blocks([[1, 2], [1, 3]], 1.0) == pytest.approx(8.0, rel=1e-15)
    assert gal_sum([1, 2, 3, 6], 1.0) == pytest.approx(8.0, rel=1e-15)
    with pytest.raises(DomainError):
        gal_sum_blocks([[1, 2], [1, 6]], 1.0)
    with pytest.raises(DomainError):
        gal_sum_blocks([[1, 2], []], 1.0)


def test_gal_sum_blocks_matches_expansion():
    blocks = [block_from_elements(0, divisors(30)), block_from_elements(1, [1, 7, 49, 77 // 7 * 7]),
              block_from_elements(2, [1, 13, 17, 13 * 17])]
    S = ConstructedSet(None, blocks)
    for sigma in (0.55, 0.8, 1.0):
        assert gal_sum_blocks(S, sigma) == pytest.approx(gal_sum(S.expand(), sigma), rel=1e-12)


def test_jordan_totient():
    assert jordan_totient(1, 1.3) == 1
    assert jordan_totient(6, 2) == 24
    total = math.fsum(jordan_totient(d, 1.2) for d in divisors(30))
    assert total == pytest.approx(30**1.2, rel=1e-10)


def test_block_cardinality_examples():
    b = block_cardinality(5, 1)
    assert (b.exact, b.bound) == (31, 80)
    b = block_cardinality(7, 0)
    assert (b.exact, b.bound) == (1, 4)
    assert block_cardinality(10, 2).exact == enumerate_block_pairs(10, 2)
    assert block_cardinality(3, 5).bound is None


def test_block_cardinality_exhaustive():
    for P in range(13):
        for v in range(4):
            assert block_cardinality(P, v).exact == enumerate_block_pairs(P, v), (P, v)


@pytest.mark.xfail(strict=True, reason="the 4 C(P,v) C(P-v,v) bound fails for small P, e.g. P=4, v=2")
def test_block_cardinality_bound_all_small():
    for P in range(13):
        for v in range(P // 2 + 1):
            assert block_cardinality(P, v).bound_holds, (P, v)


def test_block_enumeration_matches_count():
    b = block_from_elements(0, [1])
    b.primes, b.v = [2, 3, 5, 7, 11], 2
    assert len(b.enumerate()) == block_cardinality(5, 2).exact


def test_sift_chain():
    r = sift_chain_check(([11, 13, 17, 19, 23], 1, 1), 0.6)
    assert r.all_pass, r.checks
    r = sift_chain_check(([11, 13, 17, 19, 23, 29], 2, 2), 0.6)
    assert r.all_pass, r.checks
    r = sift_chain_check(([5, 7, 11, 13], 2, 1), 0.75)
    assert r.all_pass, r.checks
    with pytest.raises(ConfigurationError):
        sift_chain_check(([11, 13], 1, 2), 0.6)
    with pytest.raises(ConfigurationError):
        sift_chain_check((list(range(15)), 1, 1), 0.6)


def test_h_functional():
    alpha = 0.999 / (2 * math.log(1.01))
    h = h_functional(alpha, math.sqrt(2) / 2, 1.01, 0.999, 0.51)
    assert h.H == pytest.approx(2 * math.sqrt(2), rel=0.05)
    assert h.slack >= 0
    assert h_functional(1.0001, 0.7, math.e, 0.5, 0.6).slack < 0
    assert h_functional(2.0, 1e6, 1.2, 0.5, 0.6).H < 0


def test_optimize_h():
    o = optimize_h(0.51)
    assert o.H >= 2.5
    assert o.slack >= 0 and 1 < o.f <= math.e and 0 < o.lam < 1 and o.eta > 0 and o.alpha > 1
    for s in (0.52, 0.55, 0.6):
        assert optimize_h(s).H <= 2 * math.sqrt(2) + 0.01
    with pytest.raises(DomainError):
        optimize_h(0.8)


def test_optimize_h_beats_grid():
    best = -math.inf
    for g, eta, lam in itertools.product([0.001, 0.003, 0.01, 0.03], [0.5, 0.7, 0.9], [0.9, 0.99, 0.999]):
        best = max(best, h_functional(0.999 / (2 * g), eta, math.exp(g), lam, 0.51).H)
    assert optimize_h(0.51).H >= best - 1e-9


def test_gamma_lower_bound():
    assert gamma_lower_bound(1e6, 0.7, 0.0) == 1.0
    v = gamma_lower_bound(math.exp(math.e), 0.75, 2 * math.sqrt(2))
    assert math.log(v) == pytest.approx(4.276, abs=1e-3)
    vals = [gamma_lower_bound(1e20, s, 2.0) for s in (0.9, 0.7, 0.6, 0.55, 0.51, 0.501)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    with pytest.raises(DomainError):
        gamma_lower_bound(2.0, 0.7, 1.0)


def test_gamma_half_reference():
    assert gamma_half_reference(math.exp(math.e)) == pytest.approx(1.0)
    assert math.isfinite(gamma_half_reference(1e100)) and gamma_half_reference(1e100) > 1
    grid = [10.0**k for k in range(2, 300, 7)]
    vals = [gamma_half_reference(x) for x in grid]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    with pytest.raises(DomainError):
        gamma_half_reference(10.0)


def test_brute_force():
    assert brute_force_gamma(divisors(30), 1, 0.5).value == 1.0
    r = brute_force_gamma(divisors(6), 4, 1.0)
    assert r.S == pytest.approx(8.0) and r.value == pytest.approx(2.0)
    for n in range(1, 7):
        assert brute_force_gamma(divisors(30), n, 0.6).value >= 1.0
    with pytest.raises(ConfigurationError):
        brute_force_gamma(range(1, 60), 20, 0.5)


def test_construction(table):
    p = ConstructionParams(alpha=1.2, eta=0.7, f=1.5, lam=0.9, N=1e8, sigma=0.55)
    assert p.J == 14
    us = [p.u(j) for j in range(1, p.J + 1)]
    assert all(b <= a for a, b in zip(us, us[1:]))
    p = ConstructionParams(alpha=1.2, eta=0.7, f=1.5, lam=0.5, N=1e8, sigma=0.6)
    S = build_construction(p, table)
    assert [b.j for b in S.blocks] == list(range(1, p.J + 1))
    supports = [set(b.primes) for b in S.blocks]
    assert all(not (a & b) for a, b in itertools.combinations(supports, 2))
    for b in S.blocks:
        assert b.cardinality == block_cardinality(b.P, b.v).exact
        if b.v == 0:
            assert len(b.elements) == 1
    back = ConstructedSet.from_json(S.to_json())
    assert back.to_json() == S.to_json()
    with pytest.raises(DomainError):
        build_construction(ConstructionParams(alpha=1.2, eta=0.7, f=1.5, lam=0.1, N=1e8, sigma=0.9), table)


def test_construction_params_rejected():
    with pytest.raises(ConfigurationError):
        ConstructionParams(alpha=0.9, eta=0.7, f=1.5, lam=0.5, N=1e8, sigma=0.6)
    with pytest.raises(ConfigurationError):
        ConstructionParams(alpha=2.0, eta=0.7, f=2.0, lam=0.5, N=1e8, sigma=0.6)
