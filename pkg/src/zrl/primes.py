"""Prime sieving and the explicit prime sums built on it.

The table is produced by a segmented sieve of Eratosthenes and stores the
primes together with prefix sums of ``log p`` (the Chebyshev function).
Every real accumulation below runs in ascending prime order, either through
``math.fsum`` (exactly rounded) or a long-double prefix sum, so reports are
bit-stable between runs.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DomainError, TableTooSmallError

MAX_LIMIT = 10**9
SEGMENT = 1 << 20
EULER_GAMMA = 0.57721566490153286061

CACHE_MAGIC = b"ZRLPRIME"
CACHE_VERSION = 1
_HEADER = struct.Struct("<8sIQ")


def _small_sieve(n: int) -> np.ndarray:
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags)


@dataclass(frozen=True, eq=False)
class PrimeTable:
    """Primes up to ``limit`` with prefix data for pi(x) and theta(x).

    ``theta_prefix[k]`` is the sum of ``log p`` over the first ``k+1``
    primes.  Instances are immutable and safe to share between threads.
    """

    limit: int
    primes: np.ndarray
    theta_prefix: np.ndarray

    @classmethod
    def from_primes(cls, limit: int, primes: np.ndarray) -> "PrimeTable":
        primes = np.ascontiguousarray(primes, dtype=np.int64)
        primes.setflags(write=False)
        logs = np.log(primes.astype(np.longdouble))
        theta = np.cumsum(logs).astype(np.float64)
        theta.setflags(write=False)
        return cls(int(limit), primes, theta)

    def __len__(self) -> int:
        return len(self.primes)

    def _check(self, x: float) -> None:
        if x > self.limit:
            raise TableTooSmallError(
                f"x={x} exceeds the sieve limit {self.limit}; rebuild the table with a larger limit"
            )

    def pi(self, x: float) -> int:
        """Number of primes ``<= x``."""
        self._check(x)
        if x < 2:
            return 0
        return int(np.searchsorted(self.primes, math.floor(x), side="right"))

    def theta(self, x: float) -> float:
        """Chebyshev's theta(x) = sum of log p over p <= x."""
        k = self.pi(x)
        return float(self.theta_prefix[k - 1]) if k else 0.0

    def primes_upto(self, x: float) -> np.ndarray:
        return self.primes[: self.pi(x)]

    def primes_in(self, lo: float, hi: float) -> np.ndarray:
        """Primes in the half-open interval ``(lo, hi]``."""
        if hi <= lo:
            return self.primes[:0]
        return self.primes[self.pi(max(lo, 0)) : self.pi(hi)]


def sieve_primes(limit: int) -> PrimeTable:
    """Segmented sieve of Eratosthenes for all primes ``<= limit``."""
    if isinstance(limit, float):
        if not limit.is_integer():
            raise ConfigurationError(f"sieve limit must be an integer, got {limit}")
        limit = int(limit)
    if not 2 <= limit <= MAX_LIMIT:
        raise ConfigurationError(f"sieve limit must lie in [2, {MAX_LIMIT}], got {limit}")
    root = math.isqrt(limit)
    base = _small_sieve(max(root, 2))
    if limit <= SEGMENT:
        return PrimeTable.from_primes(limit, _small_sieve(limit))

    chunks = [_small_sieve(SEGMENT)]
    lo = SEGMENT + 1
    while lo <= limit:
        hi = min(lo + SEGMENT, limit + 1)  # segment covers [lo, hi)
        flags = np.ones(hi - lo, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= hi:
                break
            start = max(p * p, ((lo + p - 1) // p) * p)
            flags[start - lo :: p] = False
        chunks.append(np.flatnonzero(flags) + lo)
        lo = hi
    return PrimeTable.from_primes(limit, np.concatenate(chunks))


def save_prime_cache(table: PrimeTable, path: str | Path) -> None:
    """Write the table as header + little-endian u16 prime gaps."""
    gaps = np.diff(table.primes, prepend=0)
    if len(gaps) and gaps.max() > 0xFFFF:
        raise ConfigurationError("prime gap does not fit the u16 cache encoding")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(CACHE_MAGIC, CACHE_VERSION, table.limit))
        fh.write(gaps.astype("<u2").tobytes())


def load_prime_cache(path: str | Path) -> PrimeTable:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ConfigurationError(f"{path}: truncated prime cache header")
        magic, version, limit = _HEADER.unpack(head)
        if magic != CACHE_MAGIC:
            raise ConfigurationError(f"{path}: not a prime cache (bad magic {magic!r})")
        if version != CACHE_VERSION:
            raise ConfigurationError(f"{path}: unsupported cache version {version}")
        gaps = np.frombuffer(fh.read(), dtype="<u2")
    return PrimeTable.from_primes(limit, np.cumsum(gaps, dtype=np.int64))


def cached_sieve(limit: int, path: str | Path | None = None) -> PrimeTable:
    """Sieve, reusing (and refreshing) a binary cache file when given."""
    if path is None:
        return sieve_primes(limit)
    path = Path(path)
    if path.exists():
        table = load_prime_cache(path)
        if table.limit >= limit:
            if table.limit == limit:
                return table
            return PrimeTable.from_primes(limit, table.primes[: table.pi(limit)])
    table = sieve_primes(limit)
    save_prime_cache(table, path)
    return table


# --------------------------------------------------------------------------
# explicit prime sums


@dataclass(frozen=True)
class MertensBracket:
    x: float
    value: float
    lower: float
    upper: float

    @property
    def inside(self) -> bool:
        return self.lower < self.value < self.upper


def mertens_product(table: PrimeTable, x: float) -> MertensBracket:
    """prod_{p<=x}(1 - 1/p) with the Rosser-Schoenfeld bracket.

    Computed as exp of an exactly rounded sum of log1p(-1/p).
    """
    if x <= 1000:
        raise DomainError(f"the explicit Mertens bracket needs x > 1000, got {x}")
    table._check(x)
    p = table.primes_upto(x).astype(np.float64)
    value = math.exp(math.fsum(np.log1p(-1.0 / p)))
    lx = math.log(x)
    centre = 1.0 / (math.exp(EULER_GAMMA) * lx)
    half = 1.0 / (2.0 * lx * lx)
    return MertensBracket(x, value, centre * (1.0 - half), centre * (1.0 + half))


@dataclass(frozen=True)
class ChebyshevGap:
    x: float
    value: float
    comparator: float

    @property
    def ratio(self) -> float:
        return self.value / self.comparator


def chebyshev_gap(table: PrimeTable, x: float) -> ChebyshevGap:
    """pi(x) log x - theta(x), compared against x / log x."""
    if x < 2:
        raise DomainError(f"chebyshev_gap needs x >= 2, got {x}")
    table._check(x)
    lx = math.log(x)
    value = math.fsum([table.pi(x) * lx, -table.theta(x)])
    return ChebyshevGap(x, value, x / lx)


@dataclass(frozen=True)
class PrimePowerSum:
    lo: float
    hi: float
    sigma: float
    value: float
    comparator_lo: float | None
    comparator_hi: float | None

    @property
    def comparator_applicable(self) -> bool:
        return self.comparator_hi is not None

    @property
    def ratio(self) -> float:
        """value / (F(hi) - F(lo)) with F(x) = x^(1-s) / ((1-s) log x)."""
        if self.comparator_hi is None:
            raise DomainError("comparator is inapplicable at sigma = 1")
        return self.value / (self.comparator_hi - (self.comparator_lo or 0.0))


def _power_comparator(x: float, sigma: float) -> float | None:
    if sigma >= 1.0 or x <= 1.0:
        return None
    return x ** (1.0 - sigma) / ((1.0 - sigma) * math.log(x))


def prime_power_sum(table: PrimeTable, lo: float, hi: float, sigma: float) -> PrimePowerSum:
    """Sum of p^-sigma over primes in ``(lo, hi]``.

    The comparator F(x) = x^(1-sigma)/((1-sigma) log x) is reported at both
    endpoints (None where it does not apply: sigma = 1, or lo <= 1).
    """
    if not 0.0 < sigma <= 1.0:
        raise DomainError(f"sigma must lie in (0, 1], got {sigma}")
    if lo < 0 or hi < lo:
        raise DomainError(f"need 0 <= lo <= hi, got lo={lo}, hi={hi}")
    table._check(hi)
    p = table.primes_in(lo, hi).astype(np.float64)
    value = math.fsum(p ** (-sigma)) if len(p) else 0.0
    comp_hi = _power_comparator(hi, sigma)
    comp_lo = _power_comparator(lo, sigma) if comp_hi is not None else None
    return PrimePowerSum(lo, hi, sigma, value, comp_lo, comp_hi)


@dataclass(frozen=True)
class IntervalCount:
    j: int
    lo: float
    hi: float
    count: int
    comparator: float


def interval_prime_count(
    table: PrimeTable, j: int, f: float, logN: float, loglogN: float
) -> IntervalCount:
    """Exact number of primes in (f^j L, f^(j+1) L] with L = log N log_2 N."""
    if f <= 1.0:
        raise ConfigurationError(f"interval ratio f must exceed 1, got {f}")
    base = logN * loglogN
    lo, hi = f**j * base, f ** (j + 1) * base
    table._check(hi)
    count = table.pi(hi) - table.pi(lo)
    return IntervalCount(j, lo, hi, count, (f - 1.0) * f**j * logN)
