import math

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from zrl.errors import ConfigurationError, DomainError
from zrl.gcd import SetElement, gal_sum
from zrl.quadrature import QuadratureConfig, integrate
from zrl.strip import (
    FejerKernel,
    StripSettings,
    bin_set,
    convolution_identity_check,
    dirichlet_pairs,
    excluded_pairs_exact,
    frak_Z,
    i1_closed,
    i21_lower_bound,
    inner_integral,
    kernel_integral,
    kernel_K,
    kernel_K_hat,
    kernel_tail,
    kernel_transform_check,
    m1_single_bin,
    moment_M1_M2,
    strip_pipeline,
)
from zrl.zeta import ZetaGrid


def divisors(n):
    return [d for d in range(1, n + 1) if n % d == 0]


def test_bin_set_examples():
    R = bin_set([2, 3, 5], 1e4)
    assert len(R.counts) == 3 and np.all(R.r == 1.0)
    T = 1e4
    d = math.log1p(math.log(T) / T)
    R = bin_set([1000.3 * d, 1000.7 * d], T)
    assert len(R.counts) == 1 and R.r[0] == pytest.approx(math.sqrt(2))
    assert R.log_rep[0] == pytest.approx(1000.3 * d, rel=1e-15)
    R = bin_set([1000.3 * d, 1001.3 * d], T)
    assert R.bin_index.tolist() == [1000, 1001]


def test_bin_set_invariants():
    M = divisors(2 * 3 * 5 * 7 * 11 * 13)
    R = bin_set(M, 500)
    inv = R.invariants()
    assert inv["sum_r2_equals_N"] and R.N == len(M)
    assert inv["ratio_within_bin"] and inv["R0_le_sqrtJ_sqrtN"] and inv["sqrtJN_le_N"]
    t = np.linspace(-300, 300, 2001)
    assert np.all(np.abs(R.eval(t)) <= R.R0() * (1 + 1e-12))


def test_bin_set_log_values_and_set_elements():
    a = bin_set([math.log(6.0), math.log(35.0)], 1e3)
    b = bin_set([SetElement.from_int(6), SetElement.from_int(35)], 1e3)
    assert np.array_equal(a.bin_index, b.bin_index)


def test_bin_set_errors():
    with pytest.raises(DomainError):
        bin_set([0, 2], 1e3)
    with pytest.raises(DomainError):
        bin_set([], 1e3)
    with pytest.raises(DomainError):
        bin_set([2], 50)


def test_kernel_values():
    k = FejerKernel(0.1, 1e3)
    assert kernel_K(0.0, k) == pytest.approx(k.a / math.pi, rel=1e-15)
    u = np.linspace(-50, 50, 10001)
    assert np.all(kernel_K(u, k) >= 0)
    assert np.allclose(kernel_K(u, k), kernel_K(-u, k), rtol=0, atol=0)
    assert kernel_K(1.0, k) == pytest.approx(math.sin(k.a) ** 2 / (math.pi * k.a), rel=1e-14)
    w = 1e-4 / k.a
    assert kernel_K(w, k) == pytest.approx(math.sin(k.a * w) ** 2 / (math.pi * k.a * w * w), rel=1e-14)
    z = 0.7 - 0.3j
    assert kernel_K(z, k) == pytest.approx(complex(mpmath.sin(k.a * z) ** 2 / (mpmath.pi * k.a * z * z)), rel=1e-13)


def test_kernel_hat():
    k = FejerKernel(0.1, 1e3)
    assert kernel_K_hat(0.0, k) == 1.0
    assert kernel_K_hat(k.width, k) == 0.0 and kernel_K_hat(-3 * k.width, k) == 0.0
    assert kernel_K_hat(k.a, k) == pytest.approx(0.5)


def test_kernel_tail_closed_form():
    k = FejerKernel(0.1, 1e3)
    a = k.a
    for U, xi in ((30.0, 0.0), (50.0, 0.4), (80.0, 1.7)):
        # sin^2(au) cos(xi u) = [2cos(xi u) - cos((2a+xi)u) - cos((2a-xi)u)] / 4; beyond L only the
        # non-oscillating part (xi = 0) survives at the 1e-9 level, and it integrates to 1/L
        L = U + 20000.0
        f = lambda u: math.sin(a * u) ** 2 / (math.pi * a * u * u) * math.cos(xi * u)
        edges = np.arange(U, L + 0.5, 0.5)
        body = math.fsum(quad(f, lo, hi, epsabs=1e-15, epsrel=1e-13)[0] for lo, hi in zip(edges, edges[1:]))
        rest = 1 / (2 * math.pi * a * L) if xi == 0 else 0.0
        assert kernel_tail(k, U, xi) == pytest.approx(2 * (body + rest), abs=1e-8)


def test_kernel_integral_and_transform():
    k = FejerKernel(0.1, 1e3)
    total, _ = kernel_integral(k)
    assert abs(total - 1) <= 1e-6
    chk = kernel_transform_check(k, n=11)
    assert chk.max_abs_error <= 1e-8


def test_frak_Z():
    k = FejerKernel(0.1, 1e3)
    assert abs(frak_Z(0.75, 3.0, math.pi / k.a, k)) < 1e-15
    # t = 0 gives zeta(s)^2 K(u) with s = sigma + iu; the pair u, -u sums to a real value
    v = frak_Z(0.75, 0.0, 2.5, k)
    z = complex(mpmath.zeta(mpmath.mpc(0.75, 2.5)))
    assert abs(v - z * z * kernel_K(2.5, k)) <= 1e-12 * abs(v)
    w = v + frak_Z(0.75, 0.0, -2.5, k)
    assert abs(w.imag) <= 1e-14 * abs(w)
    with mpmath.workdps(30):
        ref = mpmath.zeta(mpmath.mpc(0.75, 18.3)) * mpmath.zeta(mpmath.mpc(0.75, -16.3))
    ref = complex(ref) * math.sin(k.a) ** 2 / (math.pi * k.a)
    assert abs(frak_Z(0.75, 17.3, 1.0, k) - ref) <= 1e-9 * abs(ref)


def test_dirichlet_pairs():
    k = FejerKernel(0.1, 1e3)
    ks, ls = dirichlet_pairs(k)
    Y = math.exp(k.width)
    ref = {(a, b) for a in range(1, int(Y) + 1) for b in range(1, int(Y) + 1) if a * b <= Y}
    assert set(zip(ks.astype(int), ls.astype(int))) == ref
    assert len(ks) == len(ref)


def test_identity_check_example():
    k = FejerKernel(0.1, 1e3)
    r = convolution_identity_check(0.75, 5.0, k)
    assert r.abs_diff <= 1e-3 * max(1.0, abs(r.rhs))
    with pytest.raises(DomainError):
        convolution_identity_check(0.75, 0.0, k)
    with pytest.raises(DomainError):
        convolution_identity_check(1.2, 5.0, k)


def test_inner_integral_matches_direct():
    k = FejerKernel(0.1, 2000)
    g = ZetaGrid(0.6, 0.0, 120.0)
    t = 40.0
    G, E = inner_integral(np.array([t, -t]), g, k)
    cfg = QuadratureConfig(rel_tol=1e-11, abs_tol=1e-13, panel_width=0.5)
    ref = integrate(lambda u: frak_Z(0.6, t, u, k), -t / 2, t / 2, cfg).value
    assert abs(G[0] - ref) <= 1e-8 * abs(ref)
    assert abs(G[1] - np.conj(G[0])) <= 1e-10 * abs(ref)
    assert E.max() < 1e-8


def test_single_bin_m1():
    T, beta = 300.0, 0.5
    R = bin_set([1], T)
    q = QuadratureConfig(rel_tol=1e-13, abs_tol=1e-13, panel_width=1.0)
    m = moment_M1_M2(R, 0.75, beta, FejerKernel(0.1, T), quad=q)
    assert m.M1 == pytest.approx(m1_single_bin(T, beta), rel=1e-10)
    assert m.M1 > 0
    assert abs(m.M2.imag) <= 1e-8 * abs(m.M2)
    assert i1_closed(R) == pytest.approx(T / math.log(T) * math.sqrt(math.pi), rel=1e-14)


def test_i21_bound_examples():
    b = i21_lower_bound([1], 0.7, 1e4, 0.1)
    assert b.restricted == 1.0 and b.excluded == 0.0
    assert b.rankin_bound <= 1e4 ** (-(0.7 - 0.5) * 0.1) * (1 + 1e-15)
    M = [1, 2, 3]
    b = i21_lower_bound(M, 0.7, 1e6, 0.5)
    assert b.n_excluded == 0 and b.restricted == pytest.approx(gal_sum(M, 0.7), rel=1e-15)


@pytest.mark.parametrize("sigma,eps", [(0.6, 0.1), (0.75, 0.2), (0.9, 0.3)])
def test_rankin_tail_exhaustive(sigma, eps):
    M = divisors(2 * 3 * 5 * 7 * 11)
    T = 2000.0
    b = i21_lower_bound(M, sigma, T, eps)
    n, s, amb = excluded_pairs_exact(M, sigma, T, eps)
    assert not amb
    assert n == b.n_excluded
    assert s == pytest.approx(b.excluded, rel=1e-12)
    assert b.excluded <= b.rankin_bound
    assert b.restricted + b.excluded == pytest.approx(b.S_sigma, rel=1e-13)


def test_pipeline_preconditions():
    with pytest.raises(DomainError):
        strip_pipeline(2000, 0.5, 0.6, divisors(210), settings=StripSettings(strict_hypothesis=True))
    with pytest.raises(ConfigurationError):
        strip_pipeline(2000, 1.5, 0.6, divisors(210))
    with pytest.raises(DomainError):
        strip_pipeline(2000, 0.5, 0.4, divisors(210))
    with pytest.raises(ConfigurationError):
        FejerKernel(1.5, 1e3)
