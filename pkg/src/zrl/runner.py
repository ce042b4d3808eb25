"""Strict run configurations and the dispatch from command name to pipeline."""

from __future__ import annotations

import math
import time
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import gcd as G
from .errors import ConfigurationError, DomainError
from .primes import (
    PrimeTable,
    cached_sieve,
    chebyshev_gap,
    mertens_product,
    prime_power_sum,
    sieve_primes,
)
from .quadrature import QuadratureConfig
from .report import RunReport, check, write_plot_data
from .resonator import OneLineSettings, b_window, one_line_pipeline
from .strip import StripSettings, hypothesis_sigma, strip_pipeline
from .zeta import T_MAX, EvalConfig, admissible_c, lamzouri_constant, reference_constants

COMMANDS = ("sieve", "verify-lemmas", "resonance-1line", "gcd-construct", "gcd-bruteforce", "strip-search",
            "constants")

# pi(10^k), k = 1..9
PI_POWERS_OF_TEN = {10: 4, 100: 25, 1000: 168, 10**4: 1229, 10**5: 9592, 10**6: 78498, 10**7: 664579,
                    10**8: 5761455, 10**9: 50847534}


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class QuadParams(Strict):
    rel_tol: float = Field(1e-8, gt=0, lt=1)
    abs_tol: float = Field(1e-10, gt=0)
    panel_width: float | None = Field(None, gt=0)
    max_panels: int = Field(2_000_000, ge=1)

    def build(self, default_width: float = 1.0) -> QuadratureConfig:
        return QuadratureConfig(self.rel_tol, self.abs_tol, self.panel_width or default_width, self.max_panels)


class SearchParams(Strict):
    grid_step: float = Field(0.02, gt=0, le=0.05)
    peak_step: float = Field(0.05, gt=0)
    top_k: int = Field(32, ge=1)
    refine_halfwidth: float = Field(1.0, gt=0)


class SieveParams(Strict):
    limit: int = Field(10**6, ge=2, le=10**9)


class VerifyParams(Strict):
    limit: int = Field(10**6, ge=2000, le=10**9)
    mertens_points: int = Field(200, ge=1)
    mertens_lo: float = Field(1000.0, ge=1000)
    mertens_hi: float = Field(1e6, gt=1000)
    gcd_tuples: int = Field(100_000, ge=1)
    gcd_bits: int = Field(64, ge=2, le=4096)
    jordan_max: int = Field(210, ge=1)

    @model_validator(mode="after")
    def _range(self):
        if not self.mertens_lo < self.mertens_hi <= self.limit:
            raise ValueError("need mertens_lo < mertens_hi <= limit")
        return self


class ResonanceParams(SearchParams):
    T: float = Field(2000.0, ge=100, le=T_MAX)
    beta: float = Field(0.5, gt=0, lt=1)
    c: float = -2.6
    B: float | None = None
    prime_limit: int = Field(10**6, ge=100, le=10**9)
    plot_step: float = Field(0.25, gt=0)
    i2_cutoff: float | None = Field(None, gt=1)
    quad: QuadParams = Field(default_factory=QuadParams)

    @model_validator(mode="after")
    def _window(self):
        lo, hi = b_window(self.c, self.beta)
        if not (lo < hi and self.c < admissible_c(self.beta)):
            raise ValueError(f"c = {self.c} leaves an empty B window ({lo:.6g}, {hi:.6g}); "
                             f"need c < admissible_c(beta) = {admissible_c(self.beta):.8f}")
        if self.B is not None and not lo < self.B < hi:
            raise ValueError(f"B = {self.B} outside the admissible window ({lo:.6g}, {hi:.6g})")
        return self


class ConstructParams(Strict):
    sigma: float = Field(0.6, gt=0.5, lt=1)
    N: float = Field(1e8, gt=math.e)
    alpha: float | None = Field(1.2, gt=1)
    eta: float | None = Field(0.7, gt=0)
    f: float | None = Field(1.5, gt=1, le=math.e)
    lam: float | None = Field(0.5, alias="lambda", gt=0, lt=1)
    optimize: bool = False
    h_budget: int = Field(60, ge=1)
    prime_limit: int = Field(10**6, ge=100, le=10**9)
    sift_max_P: int = Field(10, ge=0, le=14)
    sift_max_v: int = Field(2, ge=0, le=3)
    cardinality_max_P: int = Field(12, ge=0, le=14)

    @model_validator(mode="after")
    def _given(self):
        if not self.optimize and None in (self.alpha, self.eta, self.f, self.lam):
            raise ValueError("give alpha, eta, f and lambda, or set optimize = true")
        return self


class BruteParams(Strict):
    universe: list[int] = Field(default_factory=lambda: [1, 2, 3, 5, 6, 7, 10, 14, 15, 21, 30, 35, 42, 70, 105, 210])
    N: int = Field(8, ge=1)
    sigma: float = Field(0.5, gt=0, le=1)
    max_subsets: int = Field(10_000_000, ge=1)

    @model_validator(mode="after")
    def _universe(self):
        if any(u < 1 for u in self.universe):
            raise ValueError("universe elements must be positive integers")
        if len(set(self.universe)) != len(self.universe):
            raise ValueError("universe elements must be distinct")
        if not 1 <= self.N <= len(self.universe):
            raise ValueError(f"need 1 <= N <= |universe| = {len(self.universe)}")
        return self


class SourceSpec(Strict):
    kind: Literal["divisors", "explicit", "construction"] = "divisors"
    n: int | None = Field(210, ge=1)
    elements: list[int] | None = None
    construction: ConstructParams | None = None

    @model_validator(mode="after")
    def _kind(self):
        if self.kind == "divisors":
            if self.n is None:
                raise ValueError("divisors source needs n")
            fac = G.SetElement.from_int(self.n)
            if any(e > 1 for _, e in fac.exponents):
                raise ValueError(f"n = {self.n} is not squarefree")
        if self.kind == "explicit" and not self.elements:
            raise ValueError("explicit source needs a non-empty element list")
        return self


class StripParams(SearchParams):
    T: float = Field(2000.0, ge=100, le=T_MAX)
    beta: float = Field(0.5, gt=0, lt=1)
    sigma: float = Field(0.6, gt=0.5, lt=1)
    epsilon: float = Field(0.1, gt=0, lt=1)
    epsilon_rankin: float | None = Field(None, gt=0, lt=1)
    inner_width: float = Field(1.0, gt=0)
    plot_step: float = Field(1.0, gt=0)
    strict_hypothesis: bool = False
    prime_limit: int = Field(10**6, ge=100, le=10**9)
    source: SourceSpec = Field(default_factory=SourceSpec)
    quad: QuadParams = Field(default_factory=QuadParams)

    @model_validator(mode="after")
    def _pre(self):
        if not 2 * self.T**self.beta < self.T / 2:
            raise ValueError("2 T^beta must be below T/2")
        if self.strict_hypothesis and self.sigma < hypothesis_sigma(self.T):
            raise ValueError(f"sigma = {self.sigma} < 1/2 + 1/log log T = {hypothesis_sigma(self.T):.6g}")
        return self


class ConstantsParams(Strict):
    betas: list[float] = Field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75])
    lamzouri_sigmas: list[float] = Field(default_factory=lambda: [0.6, 0.75, 0.9])

    @model_validator(mode="after")
    def _ranges(self):
        if any(not 0 <= b < 1 for b in self.betas):
            raise ValueError("betas must lie in [0, 1)")
        if any(not 0.5 < s < 1 for s in self.lamzouri_sigmas):
            raise ValueError("lamzouri_sigmas must lie in (1/2, 1)")
        return self


PARAMS = {
    "sieve": SieveParams, "verify-lemmas": VerifyParams, "resonance-1line": ResonanceParams,
    "gcd-construct": ConstructParams, "gcd-bruteforce": BruteParams, "strip-search": StripParams,
    "constants": ConstantsParams,
}


class RunConfig(Strict):
    command: Literal["sieve", "verify-lemmas", "resonance-1line", "gcd-construct", "gcd-bruteforce",
                     "strip-search", "constants"]
    parameters: dict = Field(default_factory=dict)
    seed: int = Field(0, ge=0)
    output_dir: str | None = None

    def params(self) -> BaseModel:
        return PARAMS[self.command].model_validate(self.parameters)


def load_config(command: str, text: str | None) -> tuple[RunConfig, BaseModel]:
    """Parse and validate; raises ConfigurationError with the violated condition."""
    import json

    if command not in COMMANDS:
        raise ConfigurationError(f"unknown command {command!r}; choose from {', '.join(COMMANDS)}")
    try:
        raw = json.loads(text) if text else {}
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigurationError("config must be a JSON object")
    raw.setdefault("command", command)
    if raw["command"] != command:
        raise ConfigurationError(f"config is for {raw['command']!r}, not {command!r}")
    try:
        cfg = RunConfig.model_validate(raw)
        return cfg, cfg.params()
    except ValidationError as exc:
        raise ConfigurationError(_describe(exc)) from None


def _describe(exc: ValidationError) -> str:
    parts = []
    for e in exc.errors():
        loc = ".".join(str(x) for x in e["loc"]) or "<root>"
        parts.append(f"{loc}: {e['msg']}")
    return "invalid configuration; " + "; ".join(parts)


# --------------------------------------------------------------------------
# commands


def _table(limit: int, cache: str | None, floor: int = 0) -> PrimeTable:
    limit = max(limit, floor)
    return cached_sieve(limit, cache) if cache else sieve_primes(limit)


def run_sieve(p: SieveParams, rep: RunReport, ctx: dict) -> None:
    t0 = time.perf_counter()
    table = _table(p.limit, ctx.get("prime_cache"))
    rep.timing["sieve"] = time.perf_counter() - t0
    rep.data.update({"limit": table.limit, "count": len(table), "pi": table.pi(p.limit),
                     "theta": table.theta(p.limit), "largest": int(table.primes[-1])})
    for x, v in PI_POWERS_OF_TEN.items():
        if x <= p.limit:
            rep.add(check(f"pi(1e{round(math.log10(x))})", table.pi(x), v, "≈", 0.0))
    rep.add(check("theta(limit) / limit", table.theta(p.limit) / p.limit, 1.0, "informational"))
    if p.limit > 1000:
        m = mertens_product(table, p.limit)
        rep.add(check("Mertens product inside bracket at limit", int(m.inside), 1, "≈", 0.0,
                      note=f"{m.lower:.17g} < {m.value:.17g} < {m.upper:.17g}"))


def _random_gcd_tuple(rng: np.random.Generator, bits: int) -> tuple[int, int, int, int, int]:
    def rint(b):
        return int.from_bytes(rng.bytes((b + 7) // 8), "little") % (1 << b) + 1

    half = max(1, bits // 3)
    b, b2 = rint(half), rint(half)
    N = math.lcm(b, b2) * rint(half)
    a, a2 = rint(half), rint(half)
    a //= math.gcd(a, b)
    a2 //= math.gcd(a2, b2)
    while math.gcd(a, b) != 1:
        a //= math.gcd(a, b)
    while math.gcd(a2, b2) != 1:
        a2 //= math.gcd(a2, b2)
    return a, b, a2, b2, N


def run_verify(p: VerifyParams, rep: RunReport, ctx: dict) -> None:
    table = _table(p.limit, ctx.get("prime_cache"))
    xs = np.geomspace(p.mertens_lo, p.mertens_hi, p.mertens_points + 1)[1:]
    inside, margins = 0, []
    for x in xs:
        m = mertens_product(table, float(x))
        inside += m.inside
        margins.append(min(m.value - m.lower, m.upper - m.value) / m.value)
    rep.add(check("Mertens bracket strict at every sample", inside, len(xs), "≈", 0.0))
    rep.data["mertens_min_relative_margin"] = min(margins)

    rng = np.random.default_rng(rep.seed)
    ok = 0
    for _ in range(p.gcd_tuples):
        a, b, a2, b2, N = _random_gcd_tuple(rng, p.gcd_bits)
        m, n = N * a // b, N * a2 // b2
        g, l = G.gcd_lcm_rational(a, b, a2, b2, N)
        ok += (g, l) == (math.gcd(m, n), math.lcm(m, n))
    rep.add(check("rational gcd/lcm closed forms exact", ok, p.gcd_tuples, "≈", 0.0))

    bad = 0
    for D in range(1, p.jordan_max + 1):
        el = G.SetElement.from_int(D)
        if any(e > 1 for _, e in el.exponents):
            continue
        divs = G.divisors_squarefree([q for q, _ in el.exponents])
        bad += sum(G.jordan_totient(d, 2) for d in divs) != D**2
    rep.add(check("sum_{d|D} J_2(d) = D^2 on squarefree D", bad, 0, "≈", 0.0))

    gaps = [chebyshev_gap(table, float(x)) for x in (1e3, 1e4, 1e5, 1e6) if x <= p.limit]
    rep.data["chebyshev_gap_ratios"] = {f"{g.x:.0e}": g.ratio for g in gaps}
    pps = prime_power_sum(table, 1.0, float(p.mertens_hi), 0.75)
    rep.add(check("sum p^-3/4 over (1, x] vs x^{1/4}/((1/4) log x)", pps.ratio, 1.0, "informational"))


def _construction(p: ConstructParams, table_limit: int, cache, max_enumerate: int):
    if p.optimize:
        opt = G.optimize_h(p.sigma, p.h_budget)
        params = G.ConstructionParams(opt.alpha, opt.eta, opt.f, opt.lam, p.N, p.sigma)
    else:
        params = G.ConstructionParams(p.alpha, p.eta, p.f, p.lam, p.N, p.sigma)
    need = max(params.interval(j)[1] for j in range(1, params.J + 1))
    table = _table(max(table_limit, math.ceil(need)), cache)
    return params, G.build_construction(params, table, max_enumerate)


def run_construct(p: ConstructParams, rep: RunReport, ctx: dict) -> None:
    params, S = _construction(p, p.prime_limit, ctx.get("prime_cache"), ctx["max_enumerate"])
    hv = G.h_functional(params.alpha, params.eta, params.f, params.lam, params.sigma)
    rep.data.update({"J": params.J, "cardinality": str(S.cardinality), "log_cardinality": math.log(S.cardinality),
                     "log_N": params.log_N, "H": hv.H, "slack": hv.slack,
                     "blocks": [b.to_dict() for b in S.blocks]})
    rep.add(check("2 alpha log f <= 1", 2 * params.alpha * math.log(params.f), 1.0, "≤"))
    rep.add(check("H <= 2 sqrt 2", hv.H, 2 * math.sqrt(2), "informational"))
    for b in S.blocks:
        bc = G.block_cardinality(b.P, b.v)
        if b.P <= p.cardinality_max_P:
            rep.add(check(f"block {b.j}: exact cardinality = enumeration", bc.exact,
                          G.enumerate_block_pairs(b.P, b.v), "≈", 0.0))
        if bc.bound is not None:
            rep.add(check(f"block {b.j}: cardinality <= 4 C(P,v) C(P-v,v)", bc.exact, bc.bound, "≤"))
        if b.P <= p.sift_max_P and b.v <= p.sift_max_v:
            sr = G.sift_chain_check(b, params.sigma)
            for name, ok in sr.checks.items():
                rep.add(check(f"block {b.j}: sift {name}", int(ok), 1, "≈", 0.0))
    if all(b.elements is not None for b in S.blocks):
        prod = G.gal_sum_blocks(S, params.sigma)
        rep.data["S_sigma"] = prod
        rep.data["S_sigma_over_size"] = prod / S.cardinality
        rep.add(check("log(S/|M|) vs log Gamma lower bound", math.log(prod / S.cardinality),
                      G.log_gamma_lower_bound(S.cardinality, params.sigma, hv.H)
                      if S.cardinality > math.e else None, "informational"))
        if S.cardinality <= 2000:
            full = G.gal_sum(S.expand(), params.sigma)
            rep.add(check("blockwise product = expanded S_sigma", prod, full, "≈", 1e-12 * full))
    else:
        rep.add(check("implicit blocks: S_sigma not enumerated", float(S.cardinality), float(ctx["max_enumerate"]),
                      "informational"))
    ctx["artifacts"]["gcd-construct-set.json"] = S.to_json() + "\n"


def run_brute(p: BruteParams, rep: RunReport, ctx: dict) -> None:
    r = G.brute_force_gamma(p.universe, p.N, p.sigma, p.max_subsets)
    q = G.spectral_norm(p.universe, p.sigma)
    rep.data.update({"best_set": [m.to_int() for m in r.elements], "S": r.S, "Gamma_restricted": r.value,
                     "subsets": r.n_subsets, "Q_universe": q})
    rep.add(check("S/N <= spectral norm of the universe", r.value, q, "≤", 1e-9 * q))
    rep.add(check("S/N >= 1", r.value, 1.0, "≥", 1e-12))
    if p.N >= math.exp(math.e) and p.sigma == 0.5:
        rep.add(check("Gamma_1/2 reference curve", r.value, G.gamma_half_reference(p.N), "informational"))


def _strip_source(sp: SourceSpec, T: float, beta: float, sigma: float, ctx: dict):
    if sp.kind == "divisors":
        return G.divisors_squarefree([q for q, _ in G.SetElement.from_int(sp.n).exponents])
    if sp.kind == "explicit":
        return [int(m) for m in sp.elements]
    cp = sp.construction or ConstructParams(N=T ** (1 - beta), sigma=sigma)
    _, S = _construction(cp, cp.prime_limit, ctx.get("prime_cache"), ctx["max_enumerate"])
    return S


def run_strip(p: StripParams, rep: RunReport, ctx: dict) -> None:
    source = _strip_source(p.source, p.T, p.beta, p.sigma, ctx)
    s = StripSettings(quad=p.quad.build(1.0), zeta=EvalConfig(), epsilon=p.epsilon, epsilon_rankin=p.epsilon_rankin,
                      inner_width=p.inner_width, grid_step=p.grid_step, peak_step=p.peak_step, top_k=p.top_k,
                      refine_halfwidth=p.refine_halfwidth, plot_step=p.plot_step,
                      strict_hypothesis=p.strict_hypothesis, seed=rep.seed)
    out = strip_pipeline(p.T, p.beta, p.sigma, source, None, s)
    _merge(rep, out)


def run_resonance(p: ResonanceParams, rep: RunReport, ctx: dict) -> None:
    table = _table(p.prime_limit, ctx.get("prime_cache"))
    s = OneLineSettings(quad=p.quad.build(1.0), zeta=EvalConfig(), grid_step=p.grid_step, peak_step=p.peak_step,
                        top_k=p.top_k, refine_halfwidth=p.refine_halfwidth, plot_step=p.plot_step, B=p.B,
                        i2_cutoff=p.i2_cutoff, seed=rep.seed)
    _merge(rep, one_line_pipeline(p.T, p.beta, p.c, table, s))


def run_constants(p: ConstantsParams, rep: RunReport, ctx: dict) -> None:
    consts = reference_constants()
    rep.data.update(consts)
    rep.data["admissible_c"] = {f"{b:g}": admissible_c(b) for b in p.betas}
    rep.add(check("admissible_c(1/2)", admissible_c(0.5), -2.0197814, "≈", 1e-6))
    rep.add(check("admissible_c(0)", admissible_c(0.0), -1.32663426, "≈", 1e-6))
    rep.add(check("C0 + 1 - log 2 (printed vs computed)", consts["C0_plus_1_minus_log2_computed"],
                  consts["C0_plus_1_minus_log2"], "≈", 1e-7))
    lam = {}
    for sgm in p.lamzouri_sigmas:
        r = lamzouri_constant(sgm)
        lam[f"{sgm:g}"] = {"value": r.value, "error": r.error}
        rep.add(check(f"Lamzouri constant finite at sigma={sgm:g}", r.value, 0.0, "≥"))
    rep.data["lamzouri"] = lam


def _merge(rep: RunReport, out: RunReport) -> None:
    rep.checks.extend(out.checks)
    rep.data.update(out.data)
    rep.series.update(out.series)
    rep.timing.update(out.timing)


RUNNERS = {
    "sieve": run_sieve, "verify-lemmas": run_verify, "resonance-1line": run_resonance,
    "gcd-construct": run_construct, "gcd-bruteforce": run_brute, "strip-search": run_strip,
    "constants": run_constants,
}


def run(cfg: RunConfig, params: BaseModel | None = None, prime_cache: str | None = None,
        max_enumerate: int = 100_000, out_dir: str | Path | None = None) -> RunReport:
    """Execute one validated configuration; writes JSON and CSV when an output directory is known."""
    params = params or cfg.params()
    rep = RunReport(cfg.command, {"parameters": params.model_dump(mode="json", by_alias=True),
                                  "max_enumerate": max_enumerate}, seed=cfg.seed)
    ctx = {"prime_cache": prime_cache, "max_enumerate": max_enumerate, "artifacts": {}}
    t0 = time.perf_counter()
    try:
        RUNNERS[cfg.command](params, rep, ctx)
    except DomainError as exc:
        raise ConfigurationError(f"{cfg.command}: precondition violated: {exc}") from exc
    rep.timing["wall"] = time.perf_counter() - t0
    target = out_dir or cfg.output_dir
    if target is not None:
        target = Path(target)
        rep.write(target)
        for kind in rep.series:
            write_plot_data(rep, kind, target)
        for name, text in ctx["artifacts"].items():
            (target / name).write_text(text, encoding="utf-8", newline="\n")
    return rep
