"""GCD sums over sets of integers stored as prime-exponent vectors.

For m, n with exponent vectors e, e' the ratio gcd(m,n)/lcm(m,n) equals
prod p^{-|e_p - e'_p|}, so every pair term is exp(-sigma * sum |de| log p)
and no large integer is ever formed.  The module also builds the blockwise
multiplicative sets m = N_j a / b, checks their cardinality and sifting
inequalities exhaustively, and optimises the exponent functional H.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, DomainError, ZrlError
from .primes import PrimeTable


@dataclass(frozen=True, order=True)
class SetElement:
    """Positive integer as a sorted tuple of (prime, exponent >= 1)."""

    exponents: tuple = ()

    def __post_init__(self):
        ps = [p for p, _ in self.exponents]
        if ps != sorted(set(ps)) or any(e < 1 for _, e in self.exponents):
            raise DomainError(f"malformed exponent vector {self.exponents}")

    @classmethod
    def from_map(cls, exps: dict) -> "SetElement":
        return cls(tuple(sorted((int(p), int(e)) for p, e in exps.items() if e)))

    @classmethod
    def from_int(cls, n: int) -> "SetElement":
        if n < 1:
            raise DomainError("elements must be positive integers")
        out, p = {}, 2
        while p * p <= n:
            while n % p == 0:
                out[p] = out.get(p, 0) + 1
                n //= p
            p += 1 if p == 2 else 2
        if n > 1:
            out[n] = out.get(n, 0) + 1
        return cls.from_map(out)

    def to_int(self) -> int:
        return math.prod(p**e for p, e in self.exponents)

    def log(self) -> float:
        return math.fsum(e * math.log(p) for p, e in self.exponents)

    @property
    def support(self) -> frozenset:
        return frozenset(p for p, _ in self.exponents)

    def __mul__(self, other: "SetElement") -> "SetElement":
        d = dict(self.exponents)
        for p, e in other.exponents:
            d[p] = d.get(p, 0) + e
        return SetElement.from_map(d)


def _elements(M) -> list[SetElement]:
    return [m if isinstance(m, SetElement) else SetElement.from_int(int(m)) for m in M]


def _exponent_matrix(M: list[SetElement]):
    primes = sorted(set().union(*(m.support for m in M))) if M else []
    col = {p: i for i, p in enumerate(primes)}
    E = np.zeros((len(M), len(primes)), dtype=np.int64)
    for i, m in enumerate(M):
        for p, e in m.exponents:
            E[i, col[p]] = e
    # primes with one common exponent never enter |e_i - e_j|; dropping them keeps
    # the pair sums bit-identical under multiplication by a coprime element
    keep = np.flatnonzero((E != E[:1]).any(axis=0)) if len(M) else np.arange(0)
    return E[:, keep], np.log(np.array(primes, dtype=float)[keep])


def _pair_logs(E: np.ndarray, logp: np.ndarray, rows: slice) -> np.ndarray:
    """sum_p |e_i - e_j| log p for i in ``rows`` and all j."""
    if not len(logp):
        return np.zeros((len(range(*rows.indices(len(E)))), len(E)))
    D = np.abs(E[rows, None, :] - E[None, :, :]).astype(float)
    return D @ logp


# --------------------------------------------------------------------------
# rational gcd/lcm


def gcd_lcm_rational(a: int, b: int, a2: int, b2: int, N: int) -> tuple[int, int]:
    """gcd and lcm of N a / b and N a2 / b2, cross-checked against the closed forms
    N gcd(a,a2)/lcm(b,b2) and N lcm(a,a2)/gcd(b,b2)."""
    for name, v in (("a", a), ("b", b), ("a2", a2), ("b2", b2), ("N", N)):
        if v < 1:
            raise DomainError(f"{name} must be a positive integer")
    if math.gcd(a, b) != 1:
        raise DomainError(f"gcd(a, b) = {math.gcd(a, b)} != 1")
    if math.gcd(a2, b2) != 1:
        raise DomainError(f"gcd(a2, b2) = {math.gcd(a2, b2)} != 1")
    if N % b or N % b2:
        raise DomainError("b and b2 must both divide N")
    m, n = N * a // b, N * a2 // b2
    g, l = math.gcd(m, n), math.lcm(m, n)
    g2 = N * math.gcd(a, a2) // math.lcm(b, b2)
    l2 = N * math.lcm(a, a2) // math.gcd(b, b2)
    if (g, l) != (g2, l2):
        raise ZrlError(f"closed forms disagree: direct {(g, l)} vs closed {(g2, l2)}")
    return g, l


# --------------------------------------------------------------------------
# sums and norms


def gal_sum(M, sigma: float, max_size: int = 100_000, chunk: int = 1 << 22) -> float:
    """S_sigma(M) = sum over ordered pairs of (gcd/lcm)^sigma, exactly rounded sum."""
    M = _elements(M)
    if not 0 < sigma <= 1:
        raise DomainError(f"sigma must lie in (0, 1], got {sigma}")
    if len(M) > max_size:
        raise ConfigurationError(f"|M| = {len(M)} exceeds the quadratic-cost guard {max_size}")
    if len(set(M)) != len(M):
        raise DomainError("elements of M must be distinct")
    n = len(M)
    if n == 0:
        return 0.0
    E, logp = _exponent_matrix(M)
    rows = max(1, chunk // max(1, n * max(1, len(logp))))
    upper = []
    for s in range(0, n, rows):
        L = _pair_logs(E, logp, slice(s, s + rows))
        for k, row in enumerate(L):
            i = s + k
            upper.append(np.exp(-sigma * row[i + 1 :]))
    return n + 2.0 * math.fsum(itertools.chain.from_iterable(upper))


def gcd_matrix(M, sigma: float) -> np.ndarray:
    M = _elements(M)
    E, logp = _exponent_matrix(M)
    return np.exp(-sigma * _pair_logs(E, logp, slice(None)))


def spectral_norm(M, sigma: float, tol: float = 1e-12, max_iter: int = 100_000) -> float:
    """Largest eigenvalue of the GCD matrix by power iteration from the uniform vector."""
    M = _elements(M)
    if len(M) > 4096:
        raise ConfigurationError("spectral_norm is limited to |M| <= 4096")
    A = gcd_matrix(M, sigma)
    x = np.full(len(M), 1.0 / math.sqrt(len(M)))
    lam = float(x @ A @ x)
    for _ in range(max_iter):
        y = A @ x
        x = y / np.linalg.norm(y)
        new = float(x @ A @ x)
        if abs(new - lam) <= tol * abs(new):
            return new
        lam = new
    raise ZrlError(f"power iteration did not converge in {max_iter} iterations")


def jordan_totient(d, two_sigma: float):
    """d^{2s} prod_{p|d} (1 - p^{-2s}); exact integer when 2s is a positive integer."""
    d = d if isinstance(d, SetElement) else SetElement.from_int(int(d))
    if float(two_sigma).is_integer() and two_sigma > 0:
        k = int(two_sigma)
        return math.prod(p ** (k * (e - 1)) * (p**k - 1) for p, e in d.exponents)
    val = math.exp(two_sigma * d.log())
    for p, _ in d.exponents:
        val *= -math.expm1(-two_sigma * math.log(p))
    return val


# --------------------------------------------------------------------------
# construction


@dataclass(frozen=True)
class ConstructionParams:
    alpha: float
    eta: float
    f: float
    lam: float
    N: float
    sigma: float

    def __post_init__(self):
        if not self.alpha > 1:
            raise ConfigurationError("alpha must exceed 1")
        if not self.eta > 0:
            raise ConfigurationError("eta must be positive")
        if not 1 < self.f <= math.e:
            raise ConfigurationError("f must lie in (1, e]")
        if not 0 < self.lam < 1:
            raise ConfigurationError("lambda must lie in (0, 1)")
        if not 0.5 < self.sigma < 1:
            raise ConfigurationError("sigma must lie in (1/2, 1)")
        if not self.N > math.e:
            raise ConfigurationError("N must exceed e so that log log N > 0")
        if 2 * self.alpha * math.log(self.f) > 1:
            raise ConfigurationError(f"cardinality budget violated: 2 alpha log f = "
                                     f"{2 * self.alpha * math.log(self.f):.6g} > 1")
        if self.J < 1:
            raise ConfigurationError("J = floor((sigma - 1/2)^-lambda) must be >= 1")

    @property
    def J(self) -> int:
        return math.floor((self.sigma - 0.5) ** (-self.lam))

    @property
    def log_N(self) -> float:
        return math.log(self.N)

    @property
    def loglog_N(self) -> float:
        return math.log(self.log_N)

    def interval(self, j: int) -> tuple[float, float]:
        base = self.log_N * self.loglog_N
        return self.f**j * base, self.f ** (j + 1) * base

    def u(self, j: int) -> int:
        s, lN, llN = self.sigma, self.log_N, self.loglog_N
        den = j * self.f ** (j * (s - 0.5)) * math.sqrt(math.log(self.J)) * llN**s
        return math.floor(self.eta * lN ** (1 - s) / den)

    def v(self, j: int) -> int:
        return math.floor(self.alpha * self.log_N / (j * j * math.log(self.J)))


@dataclass
class Block:
    j: int
    primes: list
    u: int
    v: int
    cardinality: int
    elements: list | None = None

    @property
    def P(self) -> int:
        return len(self.primes)

    def enumerate(self) -> list[SetElement]:
        """All N_j a / b with a, b disjoint subsets of the primes, |a|, |b| <= v."""
        out = []
        P, v = self.P, self.v
        for k in range(min(v, P) + 1):
            for a in itertools.combinations(range(P), k):
                rest = [i for i in range(P) if i not in a]
                for l in range(min(v, P - k) + 1):
                    for b in itertools.combinations(rest, l):
                        ex = {p: 1 for p in self.primes}
                        for i in a:
                            ex[self.primes[i]] = 2
                        for i in b:
                            ex[self.primes[i]] = 0
                        out.append(SetElement.from_map(ex))
        return sorted(out)

    def to_dict(self) -> dict:
        d = {"j": self.j, "primes": list(map(int, self.primes)), "u_j": self.u, "v_j": self.v,
             "cardinality": str(self.cardinality)}
        if self.elements is not None:
            d["elements"] = [[list(pe) for pe in m.exponents] for m in self.elements]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Block":
        els = d.get("elements")
        if els is not None:
            els = [SetElement(tuple(tuple(pe) for pe in m)) for m in els]
        return cls(d["j"], d["primes"], d["u_j"], d["v_j"], int(d["cardinality"]), els)


@dataclass
class ConstructedSet:
    params: ConstructionParams | None
    blocks: list[Block] = field(default_factory=list)

    @property
    def cardinality(self) -> int:
        return math.prod(b.cardinality for b in self.blocks)

    def to_json(self) -> str:
        p = None if self.params is None else self.params.__dict__
        return json.dumps({"params": p, "blocks": [b.to_dict() for b in self.blocks]}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ConstructedSet":
        d = json.loads(text)
        params = None if d["params"] is None else ConstructionParams(**d["params"])
        return cls(params, [Block.from_dict(b) for b in d["blocks"]])

    def expand(self, limit: int = 10_000) -> list[SetElement]:
        if self.cardinality > limit:
            raise ConfigurationError(f"product set has {self.cardinality} elements (> {limit})")
        out = [SetElement()]
        for b in self.blocks:
            if b.elements is None:
                raise ConfigurationError(f"block {b.j} is implicit; enumerate it first")
            out = [m * e for m in out for e in b.elements]
        return sorted(out)


def block_from_elements(j: int, elements) -> Block:
    els = sorted(_elements(elements))
    primes = sorted(set().union(*(m.support for m in els))) if els else []
    return Block(j, primes, 0, 0, len(els), els)


def build_construction(params: ConstructionParams, table: PrimeTable, max_enumerate: int = 100_000) -> ConstructedSet:
    J = params.J
    if J < 2:
        raise DomainError(f"J = {J} makes log J = 0 in u_j; choose sigma closer to 1/2 so that J >= 2")
    blocks = []
    for j in range(1, J + 1):
        lo, hi = params.interval(j)
        table._check(hi)
        primes = table.primes_in(lo, hi).tolist()
        if not primes:
            raise DomainError(f"prime interval I_{j} = ({lo:.6g}, {hi:.6g}] is empty")
        v = params.v(j)
        blocks.append(Block(j, primes, params.u(j), v, block_cardinality(len(primes), v).exact))
    if sum(b.cardinality for b in blocks) <= max_enumerate:
        for b in blocks:
            b.elements = b.enumerate()
    return ConstructedSet(params, blocks)


def gal_sum_blocks(S, sigma: float) -> float:
    """prod_j S_sigma(M_j) for blocks with pairwise disjoint prime supports."""
    blocks = S.blocks if isinstance(S, ConstructedSet) else [block_from_elements(i, b) for i, b in enumerate(S)]
    seen: set = set()
    total = 1.0
    for b in blocks:
        if b.elements is None:
            raise ConfigurationError(f"block {b.j} is implicit")
        if not b.elements:
            raise DomainError(f"block {b.j} is empty")
        sup = set().union(*(m.support for m in b.elements))
        if sup & seen:
            raise DomainError(f"block {b.j} overlaps the support of an earlier block")
        seen |= sup
        total *= gal_sum(b.elements, sigma)
    return total


@dataclass(frozen=True)
class BlockCardinality:
    P: int
    v: int
    exact: int
    bound: int | None

    @property
    def bound_holds(self) -> bool | None:
        return None if self.bound is None else self.exact <= self.bound


def block_cardinality(P: int, v: int) -> BlockCardinality:
    """Exact count of pairs (a, b) of disjoint subsets with |a|, |b| <= v, and 4 C(P,v) C(P-v,v)."""
    if P < 0 or v < 0:
        raise DomainError("P and v must be nonnegative")
    exact = sum(math.comb(P, k) * math.comb(P - k, l) for k in range(min(v, P) + 1) for l in range(min(v, P - k) + 1))
    bound = 4 * math.comb(P, v) * math.comb(P - v, v) if P >= 2 * v else None
    return BlockCardinality(P, v, exact, bound)


def enumerate_block_pairs(P: int, v: int) -> int:
    """Brute-force count over all 3^P assignments (in a, in b, neither)."""
    count = 0
    for assign in itertools.product(range(3), repeat=P):
        if assign.count(1) <= v and assign.count(2) <= v:
            count += 1
    return count


# --------------------------------------------------------------------------
# sifting chain


def _subsets(mask_avail: int, kmax: int, nbits: int):
    idx = [i for i in range(nbits) if mask_avail >> i & 1]
    for k in range(min(kmax, len(idx)) + 1):
        for comb in itertools.combinations(idx, k):
            yield sum(1 << i for i in comb), k


@dataclass
class SiftReport:
    P: int
    v: int
    u: int
    sigma: float
    direct: float
    decomposed: float
    totient_min_ratio: float
    totient_floor: float
    restricted_weighted: float
    restricted_unweighted: float
    full_unweighted: float
    factorial_worst_margin: float
    checks: dict

    @property
    def all_pass(self) -> bool:
        return all(self.checks.values())


def sift_chain_check(block, sigma: float, rtol: float = 1e-12) -> SiftReport:
    """Exhaustive verification of the sifting chain on one block.

    (i)   S(M_j) = sum_{c, d disjoint} w(c) w(d) F(c, d)^2, with
          F(c, d) = sum_{A coprime to cd, w(A) <= v-w(c)} s(A) G(cAd, v-w(d)),
          G(X, k) = sum_{B coprime to X, w(B) <= k} s(B), s = prod p^-sigma,
          w = prod (1 - p^-2sigma); compared with the direct pair sum.
    (ii)  w(d) >= prod_{p | N_j} (1 - p^-2sigma) for every admissible d.
    (iii) c_j^2 F_restricted <= sum_restricted w w F^2 <= S, c_j^2 F_restricted <= c_j^2 F_full <= S,
          where the restricted family has w(c) = w(d) = v-u, w(A) = w(A') = u.
    (iv)  G(A'cd, u) >= (sum_{p not | A'cd} p^-sigma)^u / u! on the restricted family.
    """
    if isinstance(block, Block):
        primes, v, u = list(block.primes), block.v, block.u
    else:
        primes, v, u = list(block[0]), int(block[1]), int(block[2])
    P = len(primes)
    if u > v:
        raise ConfigurationError(f"u = {u} exceeds v = {v}")
    if u < 0:
        raise ConfigurationError("u must be nonnegative")
    if P > 14 or v > 3:
        raise ConfigurationError(f"block too large for exhaustive checks (P={P}, v={v}; limits 14, 3)")
    x = np.array([p ** (-sigma) for p in primes])
    wp = -np.expm1(-2 * sigma * np.log(np.array(primes, dtype=float)))
    full = (1 << P) - 1
    cj = float(np.prod(wp))

    def s(mask):
        return math.prod(x[i] for i in range(P) if mask >> i & 1)

    def w(mask):
        return math.prod(wp[i] for i in range(P) if mask >> i & 1)

    @lru_cache(maxsize=None)
    def G(excl: int, k: int) -> float:
        # elementary symmetric sums of the available x_p up to degree k
        avail = [x[i] for i in range(P) if not excl >> i & 1]
        e = [1.0] + [0.0] * k
        for xv in avail:
            for d in range(k, 0, -1):
                e[d] += e[d - 1] * xv
        return math.fsum(e)

    def F(c: int, d: int, kc: int, kd: int, exact_a: int | None = None) -> float:
        terms = []
        for A, ka in _subsets(full & ~(c | d), v - kc, P):
            if exact_a is not None and ka != exact_a:
                continue
            terms.append(s(A) * G(c | A | d, v - kd))
        return math.fsum(terms)

    def bound_b(c: int, d: int, kd: int, A: int) -> float:
        return G(c | A | d, v - kd)

    els = Block(0, primes, u, v, 0).enumerate()
    direct = gal_sum(els, sigma) if els else 0.0

    dec, full_unw, restr_w, restr_unw = [], [], [], []
    tot_ratio = math.inf
    fact_margin = math.inf
    for c, kc in _subsets(full, v, P):
        for d, kd in _subsets(full & ~c, v, P):
            Fcd = F(c, d, kc, kd)
            wc, wd = w(c), w(d)
            dec.append(wc * wd * Fcd * Fcd)
            full_unw.append(Fcd * Fcd)
            tot_ratio = min(tot_ratio, float(wd / cj))
            if kc == v - u and kd == v - u:
                Fr = F(c, d, kc, kd, exact_a=u)
                restr_w.append(wc * wd * Fr * Fr)
                restr_unw.append(Fr * Fr)
                avail_c = full & ~(c | d)
                for A2, ka in _subsets(avail_c, u, P):
                    if ka != u:
                        continue
                    lhs = bound_b(c, d, kd, A2)
                    free = math.fsum(x[i] for i in range(P) if not (c | d | A2) >> i & 1)
                    rhs = free**u / math.factorial(u)
                    fact_margin = min(fact_margin, lhs - rhs)
    decomposed = math.fsum(dec)
    R_w, R_u, F_u = math.fsum(restr_w), math.fsum(restr_unw), math.fsum(full_unw)
    slack = rtol * max(1.0, direct)
    checks = {
        "i_identity": abs(decomposed - direct) <= slack,
        "ii_totient": bool(tot_ratio >= 1.0 - 1e-15),
        "iii_restricted_le_S": R_w <= direct + slack and cj * cj * R_u <= R_w + slack,
        "iii_full_chain": cj * cj * R_u <= cj * cj * F_u + slack and cj * cj * F_u <= direct + slack,
        "iv_factorial": fact_margin >= -slack if math.isfinite(fact_margin) else True,
    }
    return SiftReport(P, v, u, sigma, direct, decomposed, tot_ratio, cj, R_w, R_u, F_u,
                      fact_margin if math.isfinite(fact_margin) else float("nan"), checks)


# --------------------------------------------------------------------------
# H functional and Gamma bounds


@dataclass(frozen=True)
class HValue:
    H: float
    slack: float
    log_argument: float


def h_functional(alpha: float, eta: float, f: float, lam: float, sigma: float) -> HValue:
    """4 eta sqrt(lam) f^{-(sigma-1/2)^{1-lam}} log(e sqrt(alpha)(f^{1-sigma}-1)/(eta(1-sigma)sqrt(f-1))).

    ``slack`` is 1 - 2 alpha log f (negative means the cardinality budget fails).
    """
    if not (f > 1 and alpha > 0 and eta > 0 and 0.5 < sigma < 1 and 0 < lam <= 1):
        raise DomainError("h_functional needs f > 1, alpha > 0, eta > 0, 1/2 < sigma < 1, 0 < lambda <= 1")
    g = math.log(f)
    arg_log = (1.0 + 0.5 * math.log(alpha) + math.log(math.expm1((1 - sigma) * g))
               - math.log(eta * (1 - sigma)) - 0.5 * math.log(math.expm1(g)))
    H = 4 * eta * math.sqrt(lam) * math.exp(-g * (sigma - 0.5) ** (1 - lam)) * arg_log
    return HValue(H, 1.0 - 2 * alpha * g, arg_log)


@dataclass(frozen=True)
class HOptimum:
    alpha: float
    eta: float
    f: float
    lam: float
    sigma: float
    H: float
    slack: float


def _golden(fun, lo: float, hi: float, iters: int = 80) -> float:
    g = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def optimize_h(sigma: float, budget: int = 60, slack: float = 0.0) -> HOptimum:
    """Coordinate ascent of H in (log f, eta, lambda) with alpha on the budget boundary.

    alpha = (1 - slack) / (2 log f); alpha > 1 confines log f to (0, (1-slack)/2).
    Each sweep maximises one coordinate by golden section; starts from
    f = e^0.01, eta = sqrt(2)/2, lambda = 0.99.
    """
    if not 0.5 < sigma <= 0.75:
        raise DomainError(f"optimize_h needs 1/2 < sigma <= 0.75, got {sigma}")
    scale = 1.0 - slack
    g_hi = 0.5 * scale * (1 - 1e-9)
    box = {"g": (1e-9, g_hi), "eta": (1e-6, 10.0), "lam": (1e-6, 1 - 1e-12)}
    x = {"g": 0.01, "eta": math.sqrt(0.5), "lam": 0.99}

    def alpha_of(g):
        # alpha from log(exp(g)) so that rounding never pushes 2 alpha log f above the budget
        return scale * (1 - 1e-12) / (2 * math.log(math.exp(g)))

    def H_of(p):
        return h_functional(alpha_of(p["g"]), p["eta"], math.exp(p["g"]), p["lam"], sigma).H

    best = H_of(x)
    for _ in range(budget):
        for k in ("g", "eta", "lam"):
            lo, hi = box[k]
            if k == "g":
                # search in log scale; the optimum sits near the lower edge
                t = _golden(lambda z: H_of({**x, k: math.exp(z)}), math.log(lo), math.log(hi))
                cand = math.exp(t)
            else:
                cand = _golden(lambda z: H_of({**x, k: z}), lo, hi)
            trial = {**x, k: cand}
            val = H_of(trial)
            if val > best:
                x, best = trial, val
    alpha = alpha_of(x["g"])
    hv = h_functional(alpha, x["eta"], math.exp(x["g"]), x["lam"], sigma)
    return HOptimum(alpha, x["eta"], math.exp(x["g"]), x["lam"], sigma, hv.H, hv.slack)


def log_gamma_lower_bound(N: float, sigma: float, H: float) -> float:
    if not N > math.e:
        raise DomainError(f"N must exceed e (log log N > 0), got {N}")
    if not 0.5 < sigma < 1:
        raise DomainError(f"sigma must lie in (1/2, 1), got {sigma}")
    lN = math.log(N)
    return H * math.sqrt(abs(math.log(sigma - 0.5))) * lN ** (1 - sigma) / math.log(lN) ** sigma


def gamma_lower_bound(N: float, sigma: float, H: float) -> float:
    """exp(H sqrt|log(sigma-1/2)| (log N)^{1-sigma} / (log log N)^sigma)."""
    return math.exp(log_gamma_lower_bound(N, sigma, H))


def gamma_half_reference(N: float) -> float:
    """exp(2 sqrt 2 sqrt(log N log_3 N / log_2 N)) for N >= e^e (where log_3 N >= 0)."""
    if not N >= math.exp(math.e) * (1 - 1e-15):
        raise DomainError("gamma_half_reference needs N >= e^e so that log log log N >= 0")
    l1 = math.log(N)
    l2 = math.log(l1)
    l3 = max(0.0, math.log(l2))
    return math.exp(2 * math.sqrt(2) * math.sqrt(l1 * l3 / l2))


@dataclass(frozen=True)
class BruteForceResult:
    elements: tuple
    S: float
    value: float
    n_subsets: int


def brute_force_gamma(universe, N: int, sigma: float, max_subsets: int = 10_000_000,
                      batch: int = 4096) -> BruteForceResult:
    """max over N-subsets of the universe of S_sigma / N (first maximiser in lexicographic order)."""
    U = sorted(set(_elements(universe)))
    if not 1 <= N <= len(U):
        raise DomainError(f"need 1 <= N <= |universe| = {len(U)}")
    total = math.comb(len(U), N)
    if total > max_subsets:
        raise ConfigurationError(f"C({len(U)}, {N}) = {total} subsets exceeds the budget {max_subsets}")
    A = gcd_matrix(U, sigma)
    best_val, best_idx = -math.inf, None
    it = itertools.combinations(range(len(U)), N)
    while True:
        chunk = np.array(list(itertools.islice(it, batch)), dtype=np.int64)
        if not len(chunk):
            break
        sub = A[chunk[:, :, None], chunk[:, None, :]]
        vals = sub.sum(axis=(1, 2))
        k = int(np.argmax(vals))
        if vals[k] > best_val * (1 + 1e-12) or best_idx is None:
            best_val, best_idx = float(vals[k]), chunk[k]
    els = tuple(U[i] for i in best_idx)
    S = gal_sum(els, sigma)
    return BruteForceResult(els, S, S / N, total)


def divisors_squarefree(primes) -> list[SetElement]:
    primes = sorted(int(p) for p in primes)
    return sorted(SetElement(tuple((p, 1) for p in c))
                  for k in range(len(primes) + 1) for c in itertools.combinations(primes, k))


def jordan_fraction(d, two_sigma: int) -> Fraction:
    """phi_{2s}(d) / d^{2s} as an exact fraction for integer 2s."""
    d = d if isinstance(d, SetElement) else SetElement.from_int(int(d))
    return Fraction(jordan_totient(d, two_sigma), d.to_int() ** two_sigma)
