"""Evaluation of zeta(s), its truncated Euler product, and reference constants.

zeta is computed by Euler-Maclaurin summation with cutoff M = ceil(1.3 max(10, |t|))
and a Bernoulli tail; this stays well conditioned up to |t| of a few million
without Riemann-Siegel machinery.  Two entry points share the same formula:

* :func:`zeta_vec` for scattered points, and
* :class:`ZetaGrid`, which tabulates zeta(sigma + iv) on a uniform grid using a
  blocked phasor factorisation (one complex matrix product per block) and
  interpolates between grid points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ConfigurationError, DomainError, PoleError, PrecisionError, TableTooSmallError
from .primes import EULER_GAMMA, PrimeTable
from .quadrature import QuadratureConfig, integrate

SIGMA_MIN, SIGMA_MAX = 0.4, 3.0
T_MAX = 1e8
POLE_RADIUS = 1e-8


def _bernoulli(nmax: int) -> list[Fraction]:
    # Akiyama-Tanigawa; returns B_0..B_nmax with B_1 = +1/2 (unused here)
    a = [Fraction(0)] * (nmax + 1)
    out = []
    for m in range(nmax + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        out.append(a[0])
    return out


_B = _bernoulli(32)
# B_{2k} / (2k)! for k = 1..16
_BCOEF = np.array([float(_B[2 * k] / math.factorial(2 * k)) for k in range(1, 17)])


@dataclass(frozen=True)
class ComplexPoint:
    sigma: float
    t: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and math.isfinite(self.t)):
            raise DomainError("s must be finite")
        if not SIGMA_MIN <= self.sigma <= SIGMA_MAX or abs(self.t) > T_MAX:
            raise DomainError(
                f"s = {self.sigma}+{self.t}i outside the supported box "
                f"{SIGMA_MIN} <= sigma <= {SIGMA_MAX}, |t| <= {T_MAX:g}"
            )

    @property
    def s(self) -> complex:
        return complex(self.sigma, self.t)


@dataclass(frozen=True)
class EvalConfig:
    target_rel_error: float = 1e-12
    max_terms: int = 10_000_000
    bernoulli_order: int = 20

    def __post_init__(self):
        if not 1e-14 <= self.target_rel_error <= 1e-6:
            raise ConfigurationError("target_rel_error must lie in [1e-14, 1e-6]")
        if self.bernoulli_order % 2 or not 2 <= self.bernoulli_order <= 30:
            raise ConfigurationError("bernoulli_order must be even and <= 30")
        if self.max_terms < 10:
            raise ConfigurationError("max_terms must be at least 10")


def _as_point(s) -> ComplexPoint:
    if isinstance(s, ComplexPoint):
        return s
    s = complex(s)
    return ComplexPoint(s.real, s.imag)


def default_cutoff(t) -> np.ndarray:
    return np.ceil(1.3 * np.maximum(10.0, np.abs(t))).astype(np.int64)


def _em_tail(s: np.ndarray, M: np.ndarray, order: int):
    """Euler-Maclaurin correction from n = M onwards and the remainder bound."""
    logM = np.log(M.astype(np.float64))
    Ms = np.exp(-s * logM)  # M^-s
    tail = M * Ms / (s - 1.0) + 0.5 * Ms
    poch = s.copy()  # s (s+1) ... (s+2k-2)
    Mpow = Ms / M  # M^(-s-1)
    K = order // 2
    for k in range(1, K + 1):
        tail = tail + _BCOEF[k - 1] * poch * Mpow
        poch = poch * (s + 2 * k - 1) * (s + 2 * k)
        Mpow = Mpow / (M * M)
    # first omitted term, with Backlund's factor |s+2K+1|/(sigma+2K+1)
    sig = s.real
    bound = np.abs(_BCOEF[K] * poch * Mpow) * np.abs(s + 2 * K + 1) / (sig + 2 * K + 1)
    return tail, bound


def _direct_sum(sigma: np.ndarray, t: np.ndarray, M: int, chunk_terms: int = 1 << 21) -> np.ndarray:
    n = np.arange(1, M, dtype=np.float64)
    ln = np.log(n)
    out = np.empty(len(t), dtype=np.complex128)
    rows = max(1, chunk_terms // max(1, M))
    for s0 in range(0, len(t), rows):
        sl = slice(s0, s0 + rows)
        w = np.exp(-np.multiply.outer(sigma[sl], ln))
        ph = np.multiply.outer(t[sl], ln)
        out[sl] = np.einsum("ij,ij->i", w, np.cos(ph)) - 1j * np.einsum("ij,ij->i", w, np.sin(ph))
    return out


def zeta_vec(sigma, t, cfg: EvalConfig | None = None, return_error: bool = False):
    """zeta(sigma + i t) for arrays of points (broadcast together)."""
    cfg = cfg or EvalConfig()
    sigma, t = np.broadcast_arrays(np.asarray(sigma, dtype=float), np.asarray(t, dtype=float))
    shape = sigma.shape
    sigma, t = sigma.ravel().copy(), t.ravel().copy()
    if np.any((sigma < SIGMA_MIN) | (sigma > SIGMA_MAX) | (np.abs(t) > T_MAX)) or not np.all(np.isfinite(t)):
        raise DomainError("point outside the supported box")
    s = sigma + 1j * t
    if np.any(np.abs(s - 1.0) < POLE_RADIUS):
        raise PoleError("zeta has a pole at s = 1")
    M = default_cutoff(t)
    values = np.empty(len(t), dtype=np.complex128)
    errors = np.empty(len(t))
    todo = np.arange(len(t))
    while len(todo):
        order = todo[np.argsort(M[todo], kind="stable")]
        # group points of similar cutoff; each group uses its largest M
        for grp in np.array_split(order, max(1, len(order) // 256)):
            if not len(grp):
                continue
            Mg = int(M[grp].max())
            head = _direct_sum(sigma[grp], t[grp], Mg)
            tail, bound = _em_tail(s[grp], np.full(len(grp), Mg), cfg.bernoulli_order)
            values[grp] = head + tail
            errors[grp] = bound
            M[grp] = Mg
        bad = todo[errors[todo] > cfg.target_rel_error * np.abs(values[todo])]
        if len(bad) and np.any(2 * M[bad] > cfg.max_terms):
            worst = float(np.max(errors[bad] / np.abs(values[bad])))
            raise PrecisionError(
                f"relative error target {cfg.target_rel_error:g} unreachable within "
                f"max_terms={cfg.max_terms}",
                achieved=worst,
                partial=values.reshape(shape),
            )
        M[bad] *= 2
        todo = bad
    values = values.reshape(shape)
    if return_error:
        return values, errors.reshape(shape)
    return values


def zeta(s, cfg: EvalConfig | None = None) -> complex:
    """zeta(s) for a single point (complex or :class:`ComplexPoint`)."""
    p = _as_point(s)
    return complex(zeta_vec(p.sigma, p.t, cfg)[()])


# --------------------------------------------------------------------------
# tabulated zeta on a line


_STENCIL = 12
_LEFT = _STENCIL // 2 - 1
_BARY = np.array([(-1) ** k * math.comb(_STENCIL - 1, k) for k in range(_STENCIL)], dtype=float)


@dataclass(eq=False)
class ZetaGrid:
    """zeta(sigma + i v) tabulated for v in [vmin, vmax] with step h.

    Values between nodes come from 12-point barycentric Lagrange
    interpolation; negative v is served through zeta(conj s) = conj zeta(s).
    """

    sigma: float
    vmin: float
    vmax: float
    h: float = 0.02
    cfg: EvalConfig = field(default_factory=EvalConfig)
    block: int = 64

    def __post_init__(self):
        if self.vmin < 0 or self.vmax <= self.vmin or self.h <= 0:
            raise ConfigurationError("ZetaGrid needs 0 <= vmin < vmax and h > 0")
        lo = self.vmin - (_LEFT + 1) * self.h
        if self.sigma == 1.0 and lo <= 0:
            raise PoleError("ZetaGrid on the 1-line must stay away from v = 0")
        n = int(math.ceil((self.vmax - lo) / self.h)) + _STENCIL + 1
        self.v0 = lo
        self.nodes = lo + self.h * np.arange(n)
        self.values, self.em_bound = self._tabulate(self.nodes)

    def _tabulate(self, v: np.ndarray):
        sigma, h, B = self.sigma, self.h, self.block
        npts = len(v)
        nblk = -(-npts // B)
        pad = nblk * B - npts
        vp = np.concatenate([v, v[-1] + h * np.arange(1, pad + 1)])
        starts = vp[::B]
        Mblk = default_cutoff(np.maximum(np.abs(starts), np.abs(starts + (B - 1) * h)))
        # superchunks of blocks that share one cutoff
        order = np.argsort(Mblk, kind="stable")
        head = np.empty((nblk, B), dtype=np.complex128)
        Mpts = np.empty(nblk, dtype=np.int64)
        jh = h * np.arange(B)
        for grp in np.array_split(order, max(1, nblk // 32)):
            if not len(grp):
                continue
            M = int(Mblk[grp].max())
            ln = np.log(np.arange(1, M, dtype=np.float64))
            step = np.exp(-1j * np.multiply.outer(ln, jh))  # (M-1, B)
            w = np.exp(-sigma * ln)
            base = np.exp(-1j * np.multiply.outer(starts[grp], ln)) * w
            head[grp] = base @ step
            Mpts[grp] = M
        head = head.ravel()[:npts]
        Mv = np.repeat(Mpts, B)[:npts]
        s = sigma + 1j * v
        tail, bound = _em_tail(s, Mv, self.cfg.bernoulli_order)
        values = head + tail
        if np.any(bound > self.cfg.target_rel_error * np.abs(values)):
            raise PrecisionError("ZetaGrid node missed the relative error target",
                                 achieved=float(np.max(bound / np.abs(values))))
        return values, float(bound.max())

    def __call__(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        neg = v < 0
        a = np.abs(v)
        if np.any(a < self.vmin) or np.any(a > self.vmax):
            raise DomainError(f"|v| outside tabulated range [{self.vmin}, {self.vmax}]")
        x = (a - self.v0) / self.h
        i0 = np.floor(x).astype(np.int64) - _LEFT
        d = x[..., None] - (i0[..., None] + np.arange(_STENCIL))  # distance to stencil nodes
        f = self.values[i0[..., None] + np.arange(_STENCIL)]
        exact = d == 0.0
        d = np.where(exact, 1.0, d)
        q = _BARY / d
        out = (q * f).sum(-1) / q.sum(-1)
        hit = exact.any(-1)
        if np.any(hit):
            out = np.where(hit, (f * exact).sum(-1), out)
        return np.where(neg, np.conj(out), out)

    def interpolation_error(self, n: int = 64, seed: int = 0) -> float:
        """Max relative deviation from direct evaluation at n midpoints."""
        rng = np.random.default_rng(seed)
        v = rng.uniform(self.vmin, self.vmax, n)
        direct = zeta_vec(self.sigma, v, self.cfg)
        return float(np.max(np.abs(self(v) - direct) / np.abs(direct)))


# --------------------------------------------------------------------------
# truncated Euler product and Lemma-type comparisons


def zeta_truncated(s, y: float, table: PrimeTable) -> complex:
    """prod_{p<=y} (1 - p^-s)^-1, accumulated in extended precision."""
    p = _as_point(s)
    return complex(zeta_truncated_vec(p.sigma, np.array([p.t]), y, table)[0])


def zeta_truncated_vec(sigma: float, t, y: float, table: PrimeTable, chunk: int = 1 << 20) -> np.ndarray:
    if y < 2:
        raise DomainError(f"truncation point y must be >= 2, got {y}")
    if sigma <= 0:
        raise DomainError("the truncated Euler product needs sigma > 0")
    table._check(y)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    ln = np.log(table.primes_upto(y).astype(np.float64))
    acc = np.zeros(len(t), dtype=np.clongdouble)
    rows = max(1, chunk // len(ln))
    for i in range(0, len(t), rows):
        ps = np.exp(-np.multiply.outer(sigma + 1j * t[i : i + rows], ln))  # p^-s
        terms = -np.log1p(-ps)
        acc[i : i + rows] = terms.astype(np.clongdouble).sum(axis=1)
    return np.exp(acc.astype(np.complex128))


@dataclass
class TruncationGap:
    T: float
    beta: float
    Y: float
    comparator: float
    t: list
    gaps: list
    flags: list

    @property
    def median_gap(self) -> float:
        return float(np.median(self.gaps))


def euler_cutoff(T: float, beta: float) -> float:
    return math.exp(math.log(T) ** (1.0 / beta))


def truncation_gap(T: float, beta: float, t_samples, table: PrimeTable, cfg: EvalConfig | None = None,
                   y: float | None = None) -> TruncationGap:
    """|zeta(1+it)/zeta(1+it;Y) - 1| at sample ordinates, Y = exp((log T)^(1/beta)).

    Samples whose gap exceeds 100 x (log T)^(-1/beta) are flagged.  ``y``
    overrides Y (used to probe convergence beyond the nominal cutoff).
    """
    if not 0 < beta < 1:
        raise DomainError(f"beta must lie in (0, 1), got {beta}")
    if T < 3:
        raise DomainError("T must be >= 3")
    t = np.asarray(t_samples, dtype=float)
    if np.any(np.abs(t) < T**beta) or np.any(np.abs(t) > T):
        raise DomainError(f"every |t| must lie in [T^beta, T] = [{T**beta:.6g}, {T:.6g}]")
    Y = euler_cutoff(T, beta) if y is None else float(y)
    if Y > table.limit:
        raise TableTooSmallError(
            f"Y = exp((log T)^(1/beta)) = {Y:.4g} exceeds the sieve limit {table.limit}; "
            "reduce T or beta"
        )
    full = zeta_vec(1.0, t, cfg)
    trunc = zeta_truncated_vec(1.0, t, Y, table)
    gaps = np.abs(full / trunc - 1.0)
    comp = math.log(T) ** (-1.0 / beta)
    return TruncationGap(T, beta, Y, comp, t.tolist(), gaps.tolist(), (gaps > 100 * comp).tolist())


# --------------------------------------------------------------------------
# modified Bessel I0 and the conjectural constant


def _log_i0_small(t: np.ndarray) -> np.ndarray:
    """log I0(t) for 0 <= t <= 20 by the power series."""
    u = 0.25 * t * t
    term = u.copy()
    s1 = u.copy()  # I0(t) - 1
    for k in range(2, 70):
        term = term * u / (k * k)
        s1 = s1 + term
    return np.log1p(s1)


_ASYM = [1.0]
for _k in range(1, 26):
    _ASYM.append(_ASYM[-1] * (2 * _k - 1) ** 2 / (8.0 * _k))
_ASYM = np.array(_ASYM)


def _log_i0_correction(t: np.ndarray) -> np.ndarray:
    """log(I0(t) sqrt(2 pi t) e^-t) for t >= 20 from the asymptotic series."""
    inv = 1.0 / t
    acc = np.zeros_like(t)
    p = np.ones_like(t)
    for c in _ASYM[1:]:
        p = p * inv
        acc = acc + c * p
    return np.log1p(acc)


def log_i0(t) -> np.ndarray:
    """log of the modified Bessel function I0 for t >= 0."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("log_i0 is implemented for t >= 0")
    small = t <= 20.0
    out = np.empty_like(t)
    out[small] = _log_i0_small(t[small])
    tb = t[~small]
    out[~small] = tb - 0.5 * np.log(2 * np.pi * tb) + _log_i0_correction(tb)
    return out


@dataclass(frozen=True)
class LamzouriResult:
    sigma: float
    value: float
    error: float
    integral: float


def lamzouri_constant(sigma: float, quad: QuadratureConfig | None = None) -> LamzouriResult:
    """sigma^(-2 sigma) (1-sigma)^(sigma-1) * int_0^inf log I0(t) t^(-1/sigma-1) dt.

    The integral is split at 1 and 20.  On (0, 1] the substitution
    t = x^(1/b), b = 2 - 1/sigma, removes the t^(1-1/sigma) endpoint
    singularity.  Beyond 20 the leading terms t - log(2 pi t)/2 are
    integrated in closed form and only the decaying asymptotic correction is
    left to quadrature (after t = 20/x).
    """
    if not 0.5 < sigma < 1.0:
        raise DomainError(f"sigma must lie in (1/2, 1), got {sigma}")
    quad = quad or QuadratureConfig(rel_tol=1e-12, abs_tol=1e-13, panel_width=0.25)
    a = 1.0 / sigma + 1.0
    b = 2.0 - 1.0 / sigma
    t1 = 20.0

    def near_zero(x):
        t = x ** (1.0 / b)
        h = np.where(t > 0, _log_i0_small(t) / np.where(t > 0, t * t, 1.0), 0.25)
        return h / b

    def middle(t):
        return log_i0(t) * t ** (-a)

    def far(x):
        xs = np.where(x > 0, x, 1.0)
        corr = np.where(x > 0, _log_i0_correction(t1 / xs), 0.0)
        return corr * x ** (a - 2.0)

    parts = [
        integrate(near_zero, 0.0, 1.0, quad),
        integrate(middle, 1.0, t1, quad),
        integrate(far, 0.0, 1.0, quad),
    ]
    lt1 = math.log(t1)
    closed = (
        t1 ** (2 - a) / (a - 2)
        - 0.5 * math.log(2 * math.pi) * t1 ** (1 - a) / (a - 1)
        - 0.5 * t1 ** (1 - a) * (lt1 / (a - 1) + 1 / (a - 1) ** 2)
    )
    integral = math.fsum([parts[0].value, parts[1].value, t1 ** (1 - a) * parts[2].value, closed])
    err = parts[0].error + parts[1].error + t1 ** (1 - a) * parts[2].error
    pref = sigma ** (-2 * sigma) * (1 - sigma) ** (sigma - 1)
    return LamzouriResult(sigma, pref * integral, pref * err, integral)


# --------------------------------------------------------------------------
# constants


def admissible_c(beta: float) -> float:
    """Supremum of admissible c: log(1-beta) - log log 4 - 1."""
    if not 0 <= beta < 1:
        raise DomainError(f"beta must lie in [0, 1), got {beta}")
    return math.log1p(-beta) - math.log(math.log(4.0)) - 1.0


C0 = -0.3953997
C0_SHIFTED = -0.0885469  # C0 + 1 - log 2 as printed


def reference_constants() -> dict:
    """Recorded constants and curve descriptors for report overlays."""
    return {
        "C0": C0,
        "C0_plus_1_minus_log2": C0_SHIFTED,
        "C0_plus_1_minus_log2_computed": C0 + 1 - math.log(2),
        "exp_gamma": math.exp(EULER_GAMMA),
        "euler_gamma": EULER_GAMMA,
        "admissible_c_beta_half": admissible_c(0.5),
        "admissible_c_beta_zero": admissible_c(0.0),
        "nu_sigma_curves": [
            {"regime": "sigma -> 1/2+", "shape": "(1/sqrt(2)) * sqrt(|log(2 sigma - 1)|)",
             "leading_coefficient": 1 / math.sqrt(2)},
            {"regime": "sigma -> 1-", "shape": "1/(1 - sigma) + O(|log(1 - sigma)|)",
             "leading_coefficient": 1.0},
            {"regime": "all sigma", "shape": "nu(sigma) >= 1/(2 - 2 sigma)", "leading_coefficient": 0.5},
        ],
        "gal_sum_exponent_constant": 2 * math.sqrt(2),
    }


def nu_lower_shape(sigma: float) -> float:
    """Leading shape of nu(sigma) as sigma -> 1/2+."""
    return math.sqrt(abs(math.log(2 * sigma - 1))) / math.sqrt(2)
