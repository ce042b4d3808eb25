"""Convolution method inside the critical strip.

A set of integers is binned on a multiplicative grid of ratio 1 + log T / T,
giving a resonator R(t) = sum_j r_j m_j^{it}.  The Fejer-type kernel
K(u) = sin^2(a u) / (pi a u^2), a = eps log T, has Fourier transform equal to a
triangle supported on |xi| <= 2a, which makes the u-convolution of
zeta(s + iu) zeta(conj(s) + iu) against K a short Dirichlet sum plus two
polar corrections.  This module checks that identity, computes the moments
M1, M2 and the Gaussian-weight integrals I1, I2, and runs the full chain
max |zeta(sigma+it)|^2 >= |M2| / M1.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.special import erf, sici

from .errors import ConfigurationError, DomainError
from .gcd import ConstructedSet, SetElement, _elements, _exponent_matrix, _pair_logs, gal_sum
from .primes import PrimeTable
from .quadrature import GAUSS_WEIGHTS, KRONROD_WEIGHTS, NODES, QuadratureConfig, integrate
from .report import RunReport, check
from .resonator import peak_search
from .zeta import _BARY, _LEFT, _STENCIL, EvalConfig, ZetaGrid, zeta, zeta_vec

SQRT_PI = math.sqrt(math.pi)


# --------------------------------------------------------------------------
# binning


@dataclass
class BinnedResonator:
    """R(t) = sum_j r_j exp(i t log m_j) over bin minima m_j with r_j^2 = bin counts."""

    T: float
    kappa: float
    bin_index: np.ndarray
    log_rep: np.ndarray
    counts: np.ndarray
    element_logs: np.ndarray
    assignment: np.ndarray
    elements: list[SetElement] | None = None

    @property
    def r(self) -> np.ndarray:
        return np.sqrt(self.counts.astype(float))

    @property
    def N(self) -> int:
        return int(self.counts.sum())

    @property
    def delta(self) -> float:
        return math.log1p(math.log(self.T) / self.T)

    def eval(self, t, chunk: int = 1 << 20) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        out = np.empty(flat.shape, dtype=np.complex128)
        step = max(1, chunk // len(self.log_rep))
        for s in range(0, len(flat), step):
            out[s : s + step] = np.exp(1j * np.multiply.outer(flat[s : s + step], self.log_rep)) @ self.r
        return out.reshape(t.shape)

    def abs2(self, t) -> np.ndarray:
        z = self.eval(t)
        return z.real**2 + z.imag**2

    def R0(self) -> float:
        return math.fsum(self.r)

    def invariants(self) -> dict:
        """Partition, bin-width and Cauchy-Schwarz facts, each as a boolean."""
        d = self.delta
        rep_of = self.log_rep[np.searchsorted(self.bin_index, self.assignment)]
        ratio = self.element_logs - rep_of
        r0 = self.R0()
        J, N = len(self.counts), self.N
        return {
            "sum_r2_equals_N": int(self.counts.sum()) == len(self.element_logs),
            "counts_positive": bool(np.all(self.counts >= 1)),
            "representatives_increasing": bool(np.all(np.diff(self.log_rep) > 0)),
            "max_log_ratio": float(ratio.max(initial=0.0)),
            "ratio_within_bin": bool(np.all(ratio >= 0) and np.all(ratio <= d + 1e-12)),
            "R0": r0,
            "R0_le_sqrtJ_sqrtN": r0 <= math.sqrt(J) * math.sqrt(N) * (1 + 1e-15),
            "sqrtJN_le_N": J <= N,
            "delta": d,
        }


def _log_value(m) -> float | np.longdouble:
    if isinstance(m, SetElement):
        return np.sum([np.longdouble(e) * np.log(np.longdouble(p)) for p, e in m.exponents], dtype=np.longdouble)
    if isinstance(m, (int, np.integer)):
        if m < 1:
            raise DomainError(f"element {m} < 1")
        return np.log(np.longdouble(m)) if m < 2**63 else np.longdouble(math.log(m))
    if isinstance(m, (float, np.floating)):
        return np.longdouble(m)
    raise DomainError(f"cannot bin element of type {type(m).__name__}")


def bin_set(M, T: float, kappa: float | None = None) -> BinnedResonator:
    """Bin a set on the grid (1 + log T / T)^j.

    ``M`` holds SetElement or int entries (integers >= 1) or floats, which are
    read as log m.  Logs are formed in long double; an element within 1e-12
    (relative) of a bin boundary goes to the lower bin.
    """
    if T < 100:
        raise DomainError(f"T must be >= 100, got {T}")
    M = list(M)
    if not M:
        raise DomainError("cannot bin an empty set")
    logs = np.array([_log_value(m) for m in M], dtype=np.longdouble)
    if np.any(logs < 0):
        raise DomainError("elements must be >= 1 (log-values >= 0)")
    delta = np.log1p(np.longdouble(math.log(T)) / np.longdouble(T))
    q = logs / delta
    j = np.floor(q).astype(np.int64)
    near = (j >= 1) & (q - j <= 1e-12 * np.maximum(q, 1))
    j = np.where(near, j - 1, j)
    order = np.lexsort((logs, j))
    js, ls = j[order], logs[order]
    uniq, first, counts = np.unique(js, return_index=True, return_counts=True)
    elements = [m for m in M if isinstance(m, SetElement)] or None
    if elements is not None and len(elements) != len(M):
        elements = None
    if elements is None and all(isinstance(m, (int, np.integer)) for m in M):
        elements = _elements(M)
    if kappa is None:
        kappa = math.log(len(M)) / math.log(T)
    return BinnedResonator(T, kappa, uniq, ls[first].astype(float), counts, logs.astype(float), j, elements)


# --------------------------------------------------------------------------
# kernel


@dataclass(frozen=True)
class FejerKernel:
    epsilon: float
    T: float

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ConfigurationError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.T <= 1:
            raise ConfigurationError("T must exceed 1")

    @property
    def a(self) -> float:
        return self.epsilon * math.log(self.T)

    @property
    def width(self) -> float:
        return 2 * self.a


def kernel_K(z, k: FejerKernel):
    """sin^2(a z) / (pi a z^2) for real or complex z (power series near 0)."""
    a = k.a
    z = np.asarray(z)
    w = a * z
    small = np.abs(w) < 1e-3
    ws = np.where(small, 1.0, w)
    main = np.sin(ws) ** 2 / ws**2
    w2 = w * w
    series = 1 - w2 / 3 + 2 * w2 * w2 / 45 - w2**3 / 315
    out = a / math.pi * np.where(small, series, main)
    return out[()] if out.ndim == 0 else out


def kernel_K_hat(xi, k: FejerKernel):
    out = np.maximum(1 - np.abs(np.asarray(xi, dtype=float)) / k.width, 0.0)
    return out[()] if out.ndim == 0 else out


def _cos_over_u2_tail(b: float, U: float) -> float:
    """int_U^inf cos(b u) / u^2 du."""
    b = abs(b)
    if b == 0:
        return 1.0 / U
    si, _ = sici(b * U)
    return math.cos(b * U) / U - b * (math.pi / 2 - si)


def kernel_tail(k: FejerKernel, U: float, xi: float = 0.0) -> float:
    """int_{|u|>U} K(u) cos(xi u) du in closed form."""
    a = k.a
    c = (_cos_over_u2_tail(xi, U) - 0.5 * _cos_over_u2_tail(2 * a + xi, U)
         - 0.5 * _cos_over_u2_tail(2 * a - xi, U))
    return 2 * c / (2 * math.pi * a)


@dataclass(frozen=True)
class KernelCheck:
    xi: np.ndarray
    numeric: np.ndarray
    exact: np.ndarray
    max_abs_error: float
    integral: float
    integral_error: float


def kernel_integral(k: FejerKernel, U: float | None = None, quad: QuadratureConfig | None = None) -> tuple[float, float]:
    """int K over R as quadrature on |u| <= U plus the exact tail; returns (value, quad error)."""
    U = 1e6 / k.a if U is None else U
    q = quad or QuadratureConfig(rel_tol=1e-12, abs_tol=1e-13, panel_width=math.pi / k.a, max_panels=4_000_000,
                                 batch_nodes=1 << 20)
    r = integrate(lambda u: kernel_K(u, k), 0.0, U, q)
    return 2 * r.value + kernel_tail(k, U), 2 * r.error


def kernel_transform_check(k: FejerKernel, n: int = 50, U: float | None = None,
                           quad: QuadratureConfig | None = None) -> KernelCheck:
    """Numerical Fourier transform of K at n points of [-1.25 width, 1.25 width]."""
    U = 200 / k.a if U is None else U
    q = quad or QuadratureConfig(rel_tol=1e-12, abs_tol=1e-13, panel_width=0.25 / k.a)
    xi = np.linspace(-1.25 * k.width, 1.25 * k.width, n)
    num = np.empty(n)
    for i, x in enumerate(xi):
        r = integrate(lambda u, x=x: kernel_K(u, k) * np.cos(x * u), 0.0, U, q)
        num[i] = 2 * r.value + kernel_tail(k, U, x)
    exact = kernel_K_hat(xi, k)
    total, err = kernel_integral(k)
    return KernelCheck(xi, num, exact, float(np.max(np.abs(num - exact))), total, err)


def frak_Z(sigma: float, t, u, k: FejerKernel, cfg: EvalConfig | None = None, zgrid: ZetaGrid | None = None):
    """zeta(sigma + i(t+u)) zeta(sigma + i(u-t)) K(u)."""
    t = np.asarray(t, dtype=float)
    u = np.asarray(u, dtype=float)
    if zgrid is not None:
        z1, z2 = zgrid(t + u), zgrid(u - t)
    else:
        z1, z2 = zeta_vec(sigma, t + u, cfg), zeta_vec(sigma, u - t, cfg)
    out = z1 * z2 * kernel_K(u, k)
    return out[()] if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# convolution identity


@dataclass(frozen=True)
class IdentityCheck:
    sigma: float
    t: float
    U: float
    lhs_raw: complex
    tail_correction: float
    lhs: complex
    dirichlet: complex
    correction_minus: complex
    correction_plus: complex
    rhs: complex
    abs_diff: float
    rel_diff: float
    quad_error: float
    tail_bound: float
    n_pairs: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def dirichlet_pairs(k: FejerKernel, max_pairs: int = 10_000_000) -> tuple[np.ndarray, np.ndarray]:
    """All (k, l) with k l <= T^{2 eps}, the support of K_hat(log kl)."""
    Y = math.exp(k.width)
    count = sum(int(Y // a) for a in range(1, int(Y) + 1))
    if count > max_pairs:
        raise ConfigurationError(f"Dirichlet sum needs {count} pairs (> {max_pairs}); lower epsilon or T")
    ks, ls = [], []
    for a in range(1, int(Y) + 1):
        lmax = int(Y // a)
        ks.extend([a] * lmax)
        ls.extend(range(1, lmax + 1))
    return np.array(ks, dtype=float), np.array(ls, dtype=float)


def polar_corrections(sigma: float, t: float, k: FejerKernel, cfg: EvalConfig | None = None) -> tuple[complex, complex]:
    """2 pi zeta(1-2it) K(-t + i(sigma-1)) and 2 pi zeta(1+2it) K(t + i(sigma-1))."""
    y = sigma - 1
    cm = 2 * math.pi * zeta(complex(1, -2 * t), cfg) * complex(kernel_K(complex(-t, y), k))
    cp = 2 * math.pi * zeta(complex(1, 2 * t), cfg) * complex(kernel_K(complex(t, y), k))
    return cm, cp


def convolution_identity_check(sigma: float, t: float, k: FejerKernel, quad: QuadratureConfig | None = None,
                               U: float = 2500.0, cfg: EvalConfig | None = None,
                               zgrid: ZetaGrid | None = None, max_pairs: int = 10_000_000) -> IdentityCheck:
    """Compare int_R frak_Z(t, u) du with the short Dirichlet sum minus two polar terms.

    The u-integral is taken over |u| <= U; since zeta(s+iu) zeta(conj s + iu)
    has mean value 1 in u, the remaining tail is replaced by int_{|u|>U} K
    (closed form).  ``tail_bound`` is the crude O(1/U) bound without that
    correction.
    """
    if t == 0:
        raise DomainError("the identity is stated for t != 0")
    if not sigma < 1:
        raise DomainError(f"sigma must be < 1, got {sigma}")
    cfg = cfg or EvalConfig()
    quad = quad or QuadratureConfig(rel_tol=1e-9, abs_tol=1e-12, panel_width=1.0)
    ks, ls = dirichlet_pairs(k, max_pairs)
    if zgrid is None or zgrid.sigma != sigma or zgrid.vmax < U + abs(t) or zgrid.vmin > 0:
        zgrid = ZetaGrid(sigma, 0.0, U + abs(t) + 1.0, cfg=cfg)
    r = integrate(lambda u: frak_Z(sigma, t, u, k, zgrid=zgrid), -U, U, quad)
    tail = kernel_tail(k, U)
    lhs = complex(r.value) + tail

    lkl = np.log(ks * ls)
    terms = kernel_K_hat(lkl, k) * np.exp(-sigma * lkl) * np.exp(-1j * t * (np.log(ks) - np.log(ls)))
    dsum = complex(math.fsum(terms.real), math.fsum(terms.imag))
    cm, cp = polar_corrections(sigma, t, k, cfg)
    rhs = dsum - cm - cp
    diff = abs(lhs - rhs)
    zmax = float(np.max(np.abs(zgrid.values)))
    return IdentityCheck(sigma, t, U, complex(r.value), tail, lhs, dsum, cm, cp, rhs, diff,
                         diff / max(1.0, abs(rhs)), r.error, (zmax**2 + 1) * 2 / (math.pi * k.a * U),
                         len(ks))


# --------------------------------------------------------------------------
# moments


@numba.njit(cache=True)
def _interp(v, vals, v0, h, bary):
    a = abs(v)
    x = (a - v0) / h
    i0 = int(math.floor(x)) - 5
    num = 0j
    den = 0.0
    for j in range(12):
        d = x - (i0 + j)
        if d == 0.0:
            num = vals[i0 + j]
            den = 1.0
            break
        q = bary[j] / d
        num += q * vals[i0 + j]
        den += q
    out = num / den
    if v < 0:
        return out.conjugate()
    return out


@numba.njit(cache=True)
def _kernel_real(u, a):
    w = a * u
    if abs(w) < 1e-3:
        w2 = w * w
        return a / math.pi * (1 - w2 / 3 + 2 * w2 * w2 / 45)
    s = math.sin(w)
    return s * s / (math.pi * a * u * u)


@numba.njit(cache=True)
def _inner_integrals(ts, width, vals, v0, h, bary, a, xk, wk, wg):
    n = ts.size
    G = np.empty(n, dtype=np.complex128)
    E = np.empty(n)
    for i in range(n):
        t = ts[i]
        half = 0.5 * abs(t)
        npan = max(1, int(math.ceil(2 * half / width)))
        pw = 2 * half / npan
        hw = 0.5 * pw
        acc = 0j
        err = 0.0
        for p in range(npan):
            mid = -half + (p + 0.5) * pw
            sk = 0j
            sg = 0j
            for j in range(21):
                u = mid + hw * xk[j]
                z = _interp(t + u, vals, v0, h, bary) * _interp(u - t, vals, v0, h, bary) * _kernel_real(u, a)
                sk += wk[j] * z
                sg += wg[j] * z
            acc += hw * sk
            err += hw * abs(sk - sg)
        G[i] = acc
        E[i] = err
    return G, E


if _STENCIL != 12 or _LEFT != 5:  # the compiled interpolant hard-codes the stencil
    raise ImportError("strip kernel expects a 12-point stencil")


def inner_integral(t, zgrid: ZetaGrid, k: FejerKernel, width: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """int_{|u|<=|t|/2} frak_Z(t, u) du for each t, with a per-t G10/K21 error estimate."""
    t = np.ascontiguousarray(np.asarray(t, dtype=float).ravel())
    at = np.abs(t)
    if at.size and (0.5 * at.min() < zgrid.vmin or 1.5 * at.max() > zgrid.vmax):
        raise DomainError("inner integral leaves the tabulated zeta range")
    return _inner_integrals(t, float(width), zgrid.values, float(zgrid.v0), float(zgrid.h), _BARY, k.a,
                            NODES, KRONROD_WEIGHTS, GAUSS_WEIGHTS)


@dataclass(frozen=True)
class StripMoments:
    M1: float
    M1_error: float
    M2: complex
    M2_error: float
    inner_error_max: float
    n_outer: int

    @property
    def ratio(self) -> float:
        return abs(self.M2) / self.M1


def _phi(t, T: float) -> np.ndarray:
    return np.exp(-((np.asarray(t) * math.log(T) / T) ** 2))


def moment_M1_M2(R: BinnedResonator, sigma: float, beta: float, k: FejerKernel,
                 quad: QuadratureConfig | None = None, zgrid: ZetaGrid | None = None,
                 inner_width: float = 1.0, cfg: EvalConfig | None = None) -> StripMoments:
    """M1 over T^beta <= |t| <= T and M2 over 2 T^beta <= |t| <= T/2, both half-lines integrated."""
    T = R.T
    quad = quad or QuadratureConfig(rel_tol=1e-8, abs_tol=1e-10, panel_width=1.0)
    lo1, hi1 = T**beta, T
    lo2, hi2 = 2 * T**beta, T / 2
    if lo2 >= hi2:
        raise DomainError(f"empty M2 range: 2 T^beta = {lo2:.6g} >= T/2")
    if zgrid is None:
        zgrid = ZetaGrid(sigma, T**beta, 0.75 * T, cfg=cfg or EvalConfig())
    if zgrid.sigma != sigma:
        raise ConfigurationError("zeta grid built for a different sigma")

    def w(t):
        return R.abs2(t) * _phi(t, T)

    m1 = [integrate(w, a, b, quad) for a, b in ((-hi1, -lo1), (lo1, hi1))]
    emax = [0.0]

    def f2(t):
        G, E = inner_integral(t, zgrid, k, inner_width)
        emax[0] = max(emax[0], float(E.max(initial=0.0)))
        return w(t) * G

    m2 = [integrate(f2, a, b, quad) for a, b in ((-hi2, -lo2), (lo2, hi2))]
    M1 = math.fsum(r.value for r in m1)
    M2 = complex(math.fsum(complex(r.value).real for r in m2), math.fsum(complex(r.value).imag for r in m2))
    return StripMoments(M1, math.fsum(r.error for r in m1), M2, math.fsum(r.error for r in m2), emax[0],
                        sum(r.n_eval for r in m2))


def m1_single_bin(T: float, beta: float) -> float:
    """M1 for |R|^2 = 1: (T/L) sqrt(pi) (erf(L) - erf(L T^{beta-1}))."""
    L = math.log(T)
    return T / L * SQRT_PI * (erf(L) - erf(L * T ** (beta - 1)))


def i1_closed(R: BinnedResonator) -> float:
    """int_R |R(t)|^2 phi(t log T / T) dt = (T/L) sqrt(pi) sum r_i r_j exp(-(T/L)^2 (log m_i/m_j)^2 / 4)."""
    s = R.T / math.log(R.T)
    d = np.subtract.outer(R.log_rep, R.log_rep)
    return s * SQRT_PI * math.fsum((np.outer(R.r, R.r) * np.exp(-((s * d) ** 2) / 4)).ravel())


def i21_closed(R: BinnedResonator, sigma: float, k: FejerKernel) -> float:
    """int |R|^2 phi * (short Dirichlet sum) dt, from the Gaussian transform."""
    s = R.T / math.log(R.T)
    ks, ls = dirichlet_pairs(k)
    lkl = np.log(ks * ls)
    cw = kernel_K_hat(lkl, k) * np.exp(-sigma * lkl)
    dk = np.log(ks) - np.log(ls)
    d = np.subtract.outer(R.log_rep, R.log_rep)
    rr = np.outer(R.r, R.r)
    total = []
    for c, x in zip(cw, dk):
        total.extend((c * rr * np.exp(-((s * (d - x)) ** 2) / 4)).ravel())
    return s * SQRT_PI * math.fsum(total)


def i2_polar(R: BinnedResonator, sigma: float, k: FejerKernel, quad: QuadratureConfig | None = None,
             cfg: EvalConfig | None = None, rel: float = 1e-17) -> tuple[float, float]:
    """int |R|^2 phi (2 pi) [zeta(1-2it) K(-t+iy) + zeta(1+2it) K(t+iy)] dt, y = sigma - 1.

    Each polar term alone has a 1/t singularity at 0; their sum is even,
    real and regular, so the two are integrated together over t > 0.
    """
    T = R.T
    cfg = cfg or EvalConfig()
    quad = quad or QuadratureConfig(rel_tol=1e-8, abs_tol=1e-10, panel_width=0.5)
    tc = T / math.log(T) * math.sqrt(-math.log(rel))
    y = sigma - 1
    grid = ZetaGrid(1.0, 0.5, 2 * tc + 1.0, cfg=cfg)

    def z1(v):
        out = np.empty(v.shape, dtype=np.complex128)
        near = np.abs(v) < 0.5
        out[near] = zeta_vec(1.0, v[near], cfg)
        out[~near] = grid(v[~near])
        return out

    def f(t):
        h = z1(-2 * t) * kernel_K(-t + 1j * y, k) + z1(2 * t) * kernel_K(t + 1j * y, k)
        return (2 * math.pi * h).real * R.abs2(t) * _phi(t, T)

    r = integrate(f, 0.0, tc, quad)
    return 2 * r.value, 2 * r.error


# --------------------------------------------------------------------------
# restricted gcd sum and Rankin's trick


@dataclass(frozen=True)
class I21Bound:
    restricted: float
    excluded: float
    n_excluded: int
    rankin_bound: float
    S_sigma: float
    S_half: float
    proxy: float
    threshold_log: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def i21_lower_bound(M, sigma: float, T: float, epsilon: float = 0.1, chunk: int = 1 << 22) -> I21Bound:
    """Split S_sigma(M) at lcm/gcd <= T^eps and bound the excluded part by Rankin's trick.

    ``M`` must be an explicit element list (or a BinnedResonator that kept one).
    """
    if isinstance(M, BinnedResonator):
        if M.elements is None:
            raise ConfigurationError("binned resonator has no explicit element list")
        M = M.elements
    if isinstance(M, ConstructedSet):
        M = M.expand()
    M = _elements(M)
    if not M:
        raise DomainError("empty set")
    E, logp = _exponent_matrix(M)
    n = len(M)
    thr = epsilon * math.log(T)
    rows = max(1, chunk // max(1, n * max(1, len(logp))))
    inc, exc, half = [], [], []
    n_exc = 0
    for s in range(0, n, rows):
        L = _pair_logs(E, logp, slice(s, s + rows))
        out = L > thr
        n_exc += int(out.sum())
        v = np.exp(-sigma * L)
        inc.append(v[~out])
        exc.append(v[out])
        half.append(np.exp(-0.5 * L).ravel())
    restricted = math.fsum(np.concatenate(inc))
    excluded = math.fsum(np.concatenate(exc))
    S_half = math.fsum(np.concatenate(half))
    S_sigma = gal_sum(M, sigma) if sigma <= 1 else restricted + excluded
    rankin = math.exp(-(sigma - 0.5) * thr) * S_half
    return I21Bound(restricted, excluded, n_exc, rankin, S_sigma, S_half,
                    T / math.log(T) * (S_sigma - rankin), thr)


def excluded_pairs_exact(M, sigma: float, T: float, epsilon: float) -> tuple[int, float, bool]:
    """Integer enumeration of pairs with lcm/gcd > T^eps.

    Returns (count, sum of (gcd/lcm)^sigma, ambiguous) where ``ambiguous``
    flags a ratio within 1e-9 of the threshold.
    """
    ints = [m.to_int() if isinstance(m, SetElement) else int(m) for m in M]
    Y = T**epsilon
    Q = math.floor(Y)
    ambiguous = False
    count, vals = 0, []
    for a in ints:
        for b in ints:
            g = math.gcd(a, b)
            q = (a // g) * (b // g)
            if abs(q - Y) <= 1e-9 * Y:
                ambiguous = True
            if q > Q and q > Y:
                count += 1
                vals.append(q ** (-sigma))
    return count, math.fsum(vals), ambiguous


# --------------------------------------------------------------------------
# pipeline


@dataclass
class StripSettings:
    quad: QuadratureConfig = field(default_factory=lambda: QuadratureConfig(rel_tol=1e-8, abs_tol=1e-10,
                                                                           panel_width=1.0))
    zeta: EvalConfig = field(default_factory=EvalConfig)
    epsilon: float = 0.1
    epsilon_rankin: float | None = None
    inner_width: float = 1.0
    grid_step: float = 0.02
    peak_step: float = 0.05
    top_k: int = 32
    refine_halfwidth: float = 1.0
    plot_step: float = 1.0
    strict_hypothesis: bool = False
    exhaustive_limit: int = 200
    seed: int = 0


def hypothesis_sigma(T: float) -> float:
    """Smallest sigma allowed by sigma >= 1/2 + 1/log log T."""
    return 0.5 + 1 / math.log(math.log(T))


def strip_pipeline(T: float, beta: float, sigma: float, source, table: PrimeTable | None = None,
                   settings: StripSettings | None = None) -> RunReport:
    """Binned-resonator chain max |zeta(sigma+it)|^2 >= |M2| / M1 on [T^beta, T]."""
    s = settings or StripSettings()
    if not 0 < beta < 1:
        raise ConfigurationError(f"beta must lie in (0, 1), got {beta}")
    if not 0.5 < sigma < 1:
        raise DomainError(f"sigma must lie in (1/2, 1), got {sigma}")
    if s.strict_hypothesis and sigma < hypothesis_sigma(T):
        raise DomainError(f"sigma = {sigma} < 1/2 + 1/log log T = {hypothesis_sigma(T):.6g}")
    clock = time.perf_counter()
    timing = {}
    elements = source.expand() if isinstance(source, ConstructedSet) else _elements(source)
    if len(set(elements)) != len(elements):
        raise DomainError("source set has repeated elements")
    k = FejerKernel(s.epsilon, T)
    eps_r = s.epsilon if s.epsilon_rankin is None else s.epsilon_rankin
    R = bin_set(elements, T, kappa=1 - beta)
    rep = RunReport("strip-search", {"T": T, "beta": beta, "sigma": sigma, "N": len(elements),
                                     "epsilon": s.epsilon, "epsilon_rankin": eps_r}, seed=s.seed)
    lo, hi = T**beta, T

    t0 = time.perf_counter()
    zgrid = ZetaGrid(sigma, lo, hi, h=s.grid_step, cfg=s.zeta)
    interp = zgrid.interpolation_error(64, seed=s.seed)
    timing["zeta_grid"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    mom = moment_M1_M2(R, sigma, beta, k, s.quad, zgrid, s.inner_width)
    timing["moments"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    search = peak_search(lambda t: np.sqrt(R.abs2(t)), lo, hi, zgrid, s, sigma=sigma)
    timing["search"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    i1 = i1_closed(R)
    i21 = i21_closed(R, sigma, k)
    i2p, i2p_err = i2_polar(R, sigma, k, s.quad, s.zeta)
    i2 = i21 - i2p
    bound = i21_lower_bound(elements, sigma, T, eps_r)
    timing["lemmas"] = time.perf_counter() - t0

    ratio = mom.ratio
    zmax2 = search["max"] ** 2
    # products of two interpolated zetas carry twice the relative error; 10x margin
    interp_budget = 20 * interp * zmax2
    eps_q = (mom.M2_error / mom.M1 + ratio * mom.M1_error / mom.M1 + mom.inner_error_max + interp_budget)
    L = math.log(T)
    N = len(elements)
    S_sig = bound.S_sigma
    kappa = 1 - beta
    C1 = i1 * L / (T * N)
    C2 = abs(i2 - mom.M2) / (N * T ** (beta + kappa) * L)
    inv = R.invariants()

    rep.data.update({
        "elements": [m.to_int() for m in elements], "bins": len(R.counts), "bin_counts": R.counts.tolist(),
        "bin_log_representatives": R.log_rep.tolist(), "R0": inv["R0"], "M1": mom.M1, "M1_error": mom.M1_error,
        "M2": mom.M2, "M2_error": mom.M2_error, "inner_error_max": mom.inner_error_max,
        "ratio_M2_M1": ratio, "eps_q": eps_q, "eps_q_interpolation": interp_budget,
        "zeta_grid_interpolation_rel_error": interp, "zeta_grid_em_bound": zgrid.em_bound,
        "max_zeta_squared": zmax2, "S_sigma": S_sig, "S_sigma_over_N": S_sig / N, "I1": i1, "I21": i21,
        "I22_plus_I23": i2p, "I22_plus_I23_error": i2p_err, "I2": i2, "C1_fitted": C1, "C2_fitted": C2,
        "kernel_a": k.a, "hypothesis_sigma_min": hypothesis_sigma(T), "i21": bound.to_dict(), **search,
    })

    rep.add(check("max|zeta|^2 >= |M2|/M1 - eps_q", zmax2, ratio, "≥", eps_q))
    rep.add(check("|Im M2| / |M2| <= 1e-8", abs(mom.M2.imag) / abs(mom.M2), 1e-8, "≤"))
    rep.add(check("M1 > 0", mom.M1, 0.0, "≥", 0.0))
    rep.add(check("M1 <= I1", mom.M1, i1, "≤", mom.M1_error + 1e-12 * i1))
    rep.add(check("sum r_j^2 = |M|", int(R.counts.sum()), N, "≈", 0.0))
    rep.add(check("representative ratio <= 1 + log T / T", inv["max_log_ratio"], R.delta, "≤", 1e-12))
    rep.add(check("R(0) <= sqrt(|J|) sqrt(|M|)", inv["R0"], math.sqrt(len(R.counts) * N), "≤", 1e-12 * N))
    rep.add(check("sqrt(|J|) sqrt(|M|) <= |M|", math.sqrt(len(R.counts) * N), N, "≤", 0.0))
    rep.add(check("restricted + excluded = S_sigma", bound.restricted + bound.excluded, S_sig, "≈", 1e-12 * S_sig))
    rep.add(check("excluded <= T^{-(sigma-1/2) eps} S_1/2", bound.excluded, bound.rankin_bound, "≤",
                  1e-12 * bound.rankin_bound))
    if N <= s.exhaustive_limit:
        cnt, exsum, amb = excluded_pairs_exact(elements, sigma, T, eps_r)
        rep.add(check("excluded pair count = integer enumeration", bound.n_excluded, cnt, "≈", 0.0,
                      note="threshold ambiguous" if amb else ""))
        rep.add(check("excluded sum = integer enumeration", bound.excluded, exsum, "≈", 1e-12 * max(1.0, exsum)))
    rep.add(check("|M2|/M1 vs S_sigma/|M|", ratio, S_sig / N, "informational"))
    rep.add(check("I1 log T / (T |M|) (fitted constant)", C1, None, "informational"))
    rep.add(check("|I2 - M2| / (|M| T^{beta+kappa} log T) (fitted constant)", C2, None, "informational"))
    rep.add(check("I2 = I21 - I22 - I23 vs M2", i2, mom.M2.real, "informational"))
    rep.add(check("sigma >= 1/2 + 1/log log T", sigma, hypothesis_sigma(T), "informational",
                  note="holds" if sigma >= hypothesis_sigma(T) else "outside the asymptotic hypothesis"))

    tp = np.arange(2 * T**beta, T / 2, s.plot_step)
    G, _ = inner_integral(tp, zgrid, k, s.inner_width)
    rep.add_series("strip", ["t", "abs_R2", "inner_re", "inner_im"],
                   np.column_stack([tp, R.abs2(tp), G.real, G.imag]))
    timing["total"] = time.perf_counter() - clock
    rep.timing = timing
    return rep


__all__ = [
    "BinnedResonator", "bin_set", "FejerKernel", "kernel_K", "kernel_K_hat", "kernel_tail", "kernel_integral",
    "kernel_transform_check", "frak_Z", "IdentityCheck", "convolution_identity_check", "dirichlet_pairs",
    "polar_corrections", "inner_integral", "StripMoments", "moment_M1_M2", "m1_single_bin", "i1_closed",
    "i21_closed", "i2_polar", "I21Bound", "i21_lower_bound", "excluded_pairs_exact", "StripSettings",
    "hypothesis_sigma", "strip_pipeline",
]
