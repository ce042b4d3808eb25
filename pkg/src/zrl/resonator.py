"""Friable resonator on the 1-line and the weighted moments built from it.

R(t) = prod_{p<=X} (1 - a_p p^{it})^{-1} with a_p = 1 - p/X and
X = B log T log log T.  The Gaussian weight phi(t log T / T), phi(t) = e^{-t^2},
damps everything beyond |t| ~ T / log T.  The pipeline integrates |R|^2 and
zeta(1+it)|R|^2 against that weight and compares the ratio with a direct
search for large |zeta(1+it)|.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from .errors import ConfigurationError, DomainError, TableTooSmallError
from .primes import EULER_GAMMA, PrimeTable
from .quadrature import QuadratureConfig, QuadResult, integrate
from .report import RunReport, check
from .zeta import EvalConfig, ZetaGrid, admissible_c, euler_cutoff, zeta_truncated_vec, zeta_vec

LOG4 = math.log(4.0)
SQRT_PI = math.sqrt(math.pi)


def b_window(c: float, beta: float) -> tuple[float, float]:
    """Open interval (e^{c+1}, (1-beta)/log 4) of admissible B."""
    return math.exp(c + 1.0), (1.0 - beta) / LOG4


@dataclass(frozen=True, eq=False)
class FriableResonator:
    T: float
    beta: float
    c: float
    B: float
    X: float
    table: PrimeTable
    primes: np.ndarray
    ap: np.ndarray

    @property
    def logp(self) -> np.ndarray:
        return np.log(self.primes.astype(float))

    @property
    def log_T(self) -> float:
        return math.log(self.T)

    @property
    def scale(self) -> float:
        return self.log_T / self.T


@dataclass(frozen=True)
class GaussianWeight:
    """phi(scale * t) with phi(t) = e^{-t^2}; transform sqrt(pi) e^{-x^2/4}."""

    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ConfigurationError("Gaussian scale must be positive")

    def __call__(self, t):
        u = self.scale * np.asarray(t, dtype=float)
        return np.exp(-u * u)

    @staticmethod
    def hat(x):
        x = np.asarray(x, dtype=float)
        return SQRT_PI * np.exp(-0.25 * x * x)

    def tail(self, U: float) -> float:
        """int_{|t|>U} phi(scale t) dt."""
        return SQRT_PI / self.scale * float(erfc(self.scale * U))


def build_resonator(T: float, beta: float, c: float, table: PrimeTable, B: float | None = None) -> FriableResonator:
    if T < 100:
        raise ConfigurationError(f"T must be >= 100, got {T}")
    if not 0 < beta < 1:
        raise ConfigurationError(f"beta must lie in (0, 1), got {beta}")
    lo, hi = b_window(c, beta)
    if not (lo < hi and c < admissible_c(beta)):
        raise ConfigurationError(
            f"empty B window: need e^(c+1) < (1-beta)/log 4, i.e. c < {admissible_c(beta):.10f}; "
            f"got e^(c+1) = {lo:.6g} >= {hi:.6g}"
        )
    if B is None:
        B = 0.5 * (lo + hi)
    elif not lo < B < hi:
        raise ConfigurationError(f"B = {B} violates e^(c+1) = {lo:.6g} < B < (1-beta)/log 4 = {hi:.6g}")
    lT = math.log(T)
    X = B * lT * math.log(lT)
    table._check(X)
    p = table.primes_upto(X)
    ap = 1.0 - p.astype(float) / X
    return FriableResonator(T, beta, c, B, X, table, p, ap)


def resonator_eval(R: FriableResonator, t) -> np.ndarray | complex:
    """R(t) from the Euler product form."""
    t = np.asarray(t, dtype=float)
    if not len(R.primes):
        return np.ones_like(t, dtype=complex)[()] if t.ndim else 1.0 + 0j
    z = R.ap * np.exp(1j * np.multiply.outer(t, R.logp))
    out = np.exp(-np.log1p(-z).sum(axis=-1))
    return out if t.ndim else complex(out)


def resonator_abs2(R: FriableResonator, t) -> np.ndarray:
    """|R(t)|^2 = prod 1 / (1 - 2 a_p cos(t log p) + a_p^2)."""
    t = np.asarray(t, dtype=float)
    if not len(R.primes):
        return np.ones_like(t)
    a = R.ap
    den = (1.0 + a * a) - 2.0 * a * np.cos(np.multiply.outer(t, R.logp))
    return 1.0 / np.prod(den, axis=-1)


def resonator_log_sup(R: FriableResonator) -> float:
    """pi(X) log X - theta(X), which equals log R(0)."""
    if R.X < 2:
        return 0.0
    return math.fsum([len(R.primes) * math.log(R.X), -R.table.theta(R.X)])


@dataclass(frozen=True)
class SumASquared:
    X: float
    direct: float
    expansion: float
    comparator: float

    @property
    def ratio(self) -> float:
        return self.direct / self.comparator


def sum_a_squared(R: FriableResonator) -> SumASquared:
    """log sum_{n friable} a_n^2 in two algebraically equal forms."""
    X = R.X
    p = R.primes.astype(float)
    direct = math.fsum(-np.log1p(-R.ap * R.ap)) if len(p) else 0.0
    if len(p):
        expansion = math.fsum([2 * len(p) * math.log(X), -R.table.theta(X), *(-np.log(2 * X - p))])
    else:
        expansion = 0.0
    comp = (2 - 2 * math.log(2)) * X / math.log(X) if X > 1 else float("nan")
    return SumASquared(X, direct, expansion, comp)


@dataclass(frozen=True)
class GammaRatio:
    X: float
    value: float
    mertens_factor: float
    correction_factor: float
    reference: float
    chain_lower: float | None

    @property
    def factored(self) -> float:
        return self.mertens_factor * self.correction_factor


def gamma_ratio_bound(R: FriableResonator) -> GammaRatio:
    """prod_{p<=X} (1 - a_p/p)^{-1}, the exact lower bound for I2/I1.

    ``chain_lower`` is the explicit bound e^g log X (1 - 1/(2 log^2 X))
    exp(-sum p/((p-1)X)), available when the Mertens bracket applies (X > 1000).
    """
    X = R.X
    if not X > math.e:
        raise DomainError(f"gamma_ratio_bound needs X > e, got {X}")
    p = R.primes.astype(float)
    value = math.exp(-math.fsum(np.log1p(-R.ap / p)))
    mert = math.exp(-math.fsum(np.log1p(-1.0 / p)))
    corr = math.exp(math.fsum(np.log((p - 1) / (p - R.ap))))
    lX = math.log(X)
    ref = math.exp(EULER_GAMMA) * (lX - 1)
    chain = None
    if X > 1000:
        chain = math.exp(EULER_GAMMA) * lX * (1 - 1 / (2 * lX * lX)) * math.exp(-math.fsum(p / ((p - 1) * X)))
    return GammaRatio(X, value, mert, corr, ref, chain)


# --------------------------------------------------------------------------
# friable enumeration (oracle side)


def friable_numbers(primes, bound: float, coeffs=None):
    """All n <= bound built from ``primes``, as (log n, a_n) arrays.

    ``coeffs`` gives the completely multiplicative a_p (default 1).
    """
    primes = [int(p) for p in primes]
    coeffs = [1.0] * len(primes) if coeffs is None else [float(a) for a in coeffs]
    logs, vals = [0.0], [1.0]
    ints = [1]
    for p, a in zip(primes, coeffs):
        new_i, new_l, new_v = [], [], []
        for n, ln, v in zip(ints, logs, vals):
            m, lm, vm = n * p, ln + math.log(p), v * a
            while m <= bound:
                new_i.append(m)
                new_l.append(lm)
                new_v.append(vm)
                m, lm, vm = m * p, lm + math.log(p), vm * a
        ints += new_i
        logs += new_l
        vals += new_v
    order = np.argsort(ints, kind="stable")
    return np.array(ints, dtype=object)[order], np.array(logs)[order], np.array(vals)[order]


def i1_series(R: FriableResonator, bound: float = 1e15) -> float:
    """I1 from the Dirichlet-series expansion with the exact Gaussian transform."""
    _, ln, an = friable_numbers(R.primes, bound, R.ap)
    K = 1.0 / R.scale
    reach = 2 * math.sqrt(200.0) / K  # hat(K d) < e^-200 beyond this
    hi = np.searchsorted(ln, ln + reach, side="right")
    terms = []
    for i in range(len(ln)):
        d = ln[i:hi[i]] - ln[i]
        w = an[i] * an[i:hi[i]] * GaussianWeight.hat(K * d)
        w[1:] *= 2.0
        terms.append(w)
    return K * math.fsum(np.concatenate(terms))


# --------------------------------------------------------------------------
# weighted moments


@dataclass(frozen=True)
class Moment:
    which: str
    value: complex | float
    error: float
    tail_bound: float
    domain: tuple
    n_eval: int

    @property
    def total_error(self) -> float:
        return self.error + self.tail_bound


def _panel_width(R: FriableResonator, with_zeta: bool) -> float:
    omega = float(np.dot(R.ap, R.logp)) + (math.log(R.T) if with_zeta else 0.0)
    return min(1.0, math.pi / max(omega, 1e-3))


def _gauss_cutoff(R: FriableResonator, rel: float, extra: float = 1.0) -> tuple[float, float]:
    """U with the weighted tail beyond |t| > U below rel * (lower bound of I1)."""
    w = GaussianWeight(R.scale)
    r0sq = math.exp(2 * resonator_log_sup(R))
    i1_lower = SQRT_PI / R.scale * math.exp(sum_a_squared(R).direct)
    U = R.T
    while w.tail(U) * r0sq * extra > rel * i1_lower:
        U *= 1.05
    return U, w.tail(U) * r0sq * extra


def weighted_moment(
    R: FriableResonator,
    which: str,
    quad: QuadratureConfig | None = None,
    table: PrimeTable | None = None,
    zgrid: ZetaGrid | None = None,
    y: float | None = None,
    zcfg: EvalConfig | None = None,
) -> Moment:
    """One of M1, M2, I1, I2 by adaptive quadrature.

    M-variants run over T^beta <= |t| <= T (the two half-lines separately,
    so conjugate symmetry of M2 is a genuine check).  I-variants run over
    |t| <= U where the Gaussian tail is below 1e-12 of the I1 lower bound;
    that tail bound is reported.  ``y`` overrides the Euler cutoff of I2.
    """
    quad = quad or QuadratureConfig()
    table = table or R.table
    w = GaussianWeight(R.scale)
    lo, hi = R.T**R.beta, R.T
    if which == "M1":
        f = lambda t: resonator_abs2(R, t) * w(t)
        parts = [integrate(f, -hi, -lo, _q(quad, R, False)), integrate(f, lo, hi, _q(quad, R, False))]
        return _combine(which, parts, 0.0, (lo, hi))
    if which == "M2":
        if zgrid is None:
            zgrid = ZetaGrid(1.0, lo, hi, cfg=zcfg or EvalConfig())
        f = lambda t: zgrid(t) * resonator_abs2(R, t) * w(t)
        parts = [integrate(f, -hi, -lo, _q(quad, R, True)), integrate(f, lo, hi, _q(quad, R, True))]
        return _combine(which, parts, 0.0, (lo, hi))
    if which == "I1":
        U, tail = _gauss_cutoff(R, 1e-12)
        f = lambda t: resonator_abs2(R, t) * w(t)
        return _combine(which, [integrate(f, -U, U, _q(quad, R, False))], tail, (0.0, U))
    if which == "I2":
        Y = euler_cutoff(R.T, R.beta) if y is None else float(y)
        if Y > table.limit:
            raise TableTooSmallError(
                f"I2 needs primes up to Y = {Y:.4g} beyond the sieve limit {table.limit}; "
                "pass a smaller Euler cutoff or raise the limit"
            )
        lY = table.primes_upto(Y).astype(float)
        zmax = math.exp(-math.fsum(np.log1p(-1.0 / lY)))  # |zeta(1+it;Y)| <= zeta(1;Y)
        U, tail = _gauss_cutoff(R, 1e-12, zmax)
        f = lambda t: zeta_truncated_vec(1.0, t, Y, table) * resonator_abs2(R, t) * w(t)
        return _combine(which, [integrate(f, -U, U, _q(quad, R, False))], tail, (0.0, U))
    raise ConfigurationError(f"unknown moment {which!r}; expected M1, M2, I1 or I2")


def _q(quad: QuadratureConfig, R: FriableResonator, with_zeta: bool) -> QuadratureConfig:
    return QuadratureConfig(quad.rel_tol, quad.abs_tol, min(quad.panel_width, _panel_width(R, with_zeta)),
                            quad.max_panels, quad.batch_nodes)


def _combine(which: str, parts: list[QuadResult], tail: float, domain) -> Moment:
    vals = [p.value for p in parts]
    if any(isinstance(v, complex) for v in vals):
        value = complex(math.fsum(complex(v).real for v in vals), math.fsum(complex(v).imag for v in vals))
    else:
        value = math.fsum(vals)
    return Moment(which, value, math.fsum(p.error for p in parts), tail, tuple(domain),
                  sum(p.n_eval for p in parts))


# --------------------------------------------------------------------------
# pipeline


@dataclass
class OneLineSettings:
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)
    zeta: EvalConfig = field(default_factory=EvalConfig)
    grid_step: float = 0.02
    peak_step: float = 0.05
    top_k: int = 32
    refine_halfwidth: float = 1.0
    plot_step: float = 0.25
    B: float | None = None
    i2_cutoff: float | None = None
    seed: int = 0


def _golden_max(f, a: float, b: float, tol: float = 1e-9) -> tuple[float, float]:
    g = (math.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return float(x), f(x)


def _local_peaks(y: np.ndarray) -> np.ndarray:
    return np.flatnonzero((y[1:-1] >= y[:-2]) & (y[1:-1] > y[2:])) + 1


def peak_search(abs_r, lo: float, hi: float, zgrid: ZetaGrid, settings, sigma: float = 1.0) -> dict:
    """Grid + golden-section search for large |zeta(sigma+it)| on [lo, hi].

    Seeds are the top-k local maxima of ``abs_r`` (|R|) sampled at
    ``settings.peak_step`` plus the largest tabulated |zeta| itself; each seed
    is refined by golden section on direct evaluations around the best grid
    node within ``settings.refine_halfwidth``.
    """
    tg = np.arange(lo, hi, settings.peak_step)
    absR = abs_r(tg)
    pk = _local_peaks(absR)
    seeds_R = tg[pk[np.argsort(-absR[pk], kind="stable")[: settings.top_k]]]
    nodes = zgrid.nodes
    inside = (nodes >= lo) & (nodes <= hi)
    zabs = np.abs(zgrid.values)
    zabs_in = np.where(inside, zabs, -np.inf)
    global_node = float(nodes[int(np.argmax(zabs_in))])
    h = zgrid.h

    def f(x):
        return abs(complex(zeta_vec(sigma, x, settings.zeta)[()]))

    def refine(seed):
        sel = inside & (np.abs(nodes - seed) <= settings.refine_halfwidth)
        if not sel.any():
            return float(seed), f(seed)
        k = np.flatnonzero(sel)[int(np.argmax(zabs[sel]))]
        a, b = max(lo, nodes[k] - h), min(hi, nodes[k] + h)
        return _golden_max(f, a, b)

    seeded = [refine(s) for s in seeds_R]
    best_seeded = max(seeded, key=lambda r: r[1]) if seeded else (float("nan"), -math.inf)
    best_global = refine(global_node)
    best = max([best_seeded, best_global], key=lambda r: r[1])
    return {
        "seeds": seeds_R.tolist(),
        "seeded_max": best_seeded[1],
        "seeded_argmax": best_seeded[0],
        "global_grid_max": float(zabs_in.max()),
        "global_refined_max": best_global[1],
        "global_argmax": best_global[0],
        "max": best[1],
        "argmax": best[0],
    }


def one_line_pipeline(T: float, beta: float, c: float, table: PrimeTable,
                      settings: OneLineSettings | None = None) -> RunReport:
    """Resonance pipeline on the 1-line; returns a report of measured chains."""
    s = settings or OneLineSettings()
    if not 0 < beta < 1:
        raise ConfigurationError(f"beta must lie in (0, 1), got {beta}")
    clock = time.perf_counter()
    timing = {}
    R = build_resonator(T, beta, c, table, s.B)
    rep = RunReport("resonance-1line", {"T": T, "beta": beta, "c": c}, seed=s.seed)
    lo, hi = T**beta, T

    t0 = time.perf_counter()
    zgrid = ZetaGrid(1.0, lo, hi, h=s.grid_step, cfg=s.zeta)
    interp = zgrid.interpolation_error(64, seed=s.seed)
    timing["zeta_grid"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    m1 = weighted_moment(R, "M1", s.quad)
    m2 = weighted_moment(R, "M2", s.quad, zgrid=zgrid)
    i1 = weighted_moment(R, "I1", s.quad)
    timing["moments"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    search = peak_search(lambda t: np.abs(resonator_eval(R, t)), lo, hi, zgrid, s)
    timing["search"] = time.perf_counter() - t0

    ratio = abs(m2.value) / m1.value
    # error budget of |M2|/M1: quadrature of both moments plus interpolation of zeta
    interp_budget = 10 * interp * search["max"]
    eps_q = m2.total_error / m1.value + ratio * m1.total_error / m1.value + interp_budget
    sa = sum_a_squared(R)
    gr = gamma_ratio_bound(R) if R.X > math.e else None
    log_sup = resonator_log_sup(R)
    log_r0 = math.log(abs(complex(resonator_eval(R, 0.0))))
    l2, l3 = math.log(math.log(T)), math.log(math.log(math.log(T)))
    theory = math.exp(EULER_GAMMA) * (l2 + l3 + c)
    exponent = R.B * LOG4 - (1 - beta)
    i1_ser = i1_series(R)

    rep.data.update({
        "B": R.B, "B_window": list(b_window(c, beta)), "X": R.X, "primes": R.primes.tolist(),
        "a_p": R.ap.tolist(), "M1": m1.value, "M1_error": m1.total_error, "M2": m2.value,
        "M2_error": m2.total_error, "I1": i1.value, "I1_error": i1.total_error, "I1_series": i1_ser,
        "ratio_M2_M1": ratio, "eps_q": eps_q, "eps_q_interpolation": interp_budget,
        "zeta_grid_interpolation_rel_error": interp, "zeta_grid_em_bound": zgrid.em_bound,
        "theoretical_bound": theory, "error_exponent_Blog4_minus_1_minus_beta": exponent,
        "log_sum_a_squared": sa.direct, "log_sum_a_squared_expansion": sa.expansion,
        "log_R0": log_r0, "log_sup": log_sup, "B_log_T": R.B * math.log(T), **search,
    })
    if gr is not None:
        rep.data.update({"gamma_ratio_bound": gr.value, "gamma_ratio_reference": gr.reference})

    rep.add(check("max|zeta(1+it)| >= |M2|/M1 - eps_q", search["max"], ratio, "≥", eps_q))
    rep.add(check("max|zeta(1+it)| >= 0.8 e^gamma log log T", search["max"],
                  0.8 * math.exp(EULER_GAMMA) * l2, "≥"))
    rep.add(check("M1 <= I1", m1.value, i1.value, "≤", m1.total_error + i1.total_error))
    rep.add(check("I1 >= sqrt(pi) (T/log T) sum a_n^2", i1.value,
                  SQRT_PI / R.scale * math.exp(sa.direct), "≥", i1.total_error))
    rep.add(check("I1 quadrature = I1 series", i1.value, i1_ser, "≈",
                  i1.total_error + 1e-9 * abs(i1_ser)))
    rep.add(check("|Im M2| / |M2| <= 1e-8", abs(m2.value.imag) / abs(m2.value), 1e-8, "≤"))
    rep.add(check("log R(0) = pi(X) log X - theta(X)", log_r0, log_sup, "≈", 1e-10 * max(1.0, abs(log_sup))))
    rep.add(check("log sum a_n^2: product form = expansion", sa.direct, sa.expansion, "≈",
                  1e-10 * max(1.0, abs(sa.direct))))
    rep.add(check("|M2|/M1 vs e^gamma(log2 T + log3 T + c)", ratio, theory, "informational"))
    rep.add(check("max|zeta| vs e^gamma(log2 T + log3 T + c)", search["max"], theory, "informational"))
    rep.add(check("error exponent B log 4 - (1-beta) < 0", exponent, 0.0, "informational",
                  note="negative" if exponent < 0 else "non-negative"))

    Y = euler_cutoff(T, beta) if s.i2_cutoff is None else s.i2_cutoff
    if Y <= table.limit and gr is not None:
        i2 = weighted_moment(R, "I2", s.quad, y=Y)
        rep.data.update({"I2": i2.value, "I2_error": i2.total_error, "I2_cutoff": Y})
        r21 = i2.value.real / i1.value
        tol = (i2.total_error + r21 * i1.total_error) / i1.value
        rep.add(check("I2/I1 >= prod (1 - a_p/p)^-1", r21, gr.value, "≥", tol))
    else:
        rep.add(check("I2 skipped: Euler cutoff beyond sieve limit", Y, float(table.limit), "informational"))

    step = max(1, int(round(s.plot_step / s.grid_step)))
    sel = np.flatnonzero((zgrid.nodes >= lo) & (zgrid.nodes <= hi))[::step]
    tp = zgrid.nodes[sel]
    rep.add_series("resonance", ["t", "abs_R", "abs_zeta"],
                   np.column_stack([tp, np.abs(resonator_eval(R, tp)), np.abs(zgrid.values[sel])]))
    timing["total"] = time.perf_counter() - clock
    rep.timing = timing
    return rep
