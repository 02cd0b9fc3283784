"""Sieves, factorization and divisor enumeration.

Everything downstream (window sweeps, moments, sampling) consumes the
types defined here: integers always travel together with their prime
factorization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

DIVISOR_BUDGET = 2**24
SPF_ENTRY_BUDGET = 2**28          # uint32 entries, ~1 GiB
SEGMENT_SIEVE_SPAN_BUDGET = 2**28
FALLBACK_TRIAL_LIMIT = 10**6

# First 13 primes as Miller-Rabin bases: deterministic below 3.317e24
# (Sorenson & Webster).
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_DET_LIMIT = 3_317_044_064_679_887_385_961_981


class ResourceLimitError(Exception):
    """A configured memory or enumeration budget would be exceeded."""


class FactoringError(Exception):
    """A composite cofactor resisted splitting within the retry budget."""

    def __init__(self, cofactor: int):
        super().__init__(f"could not split composite cofactor {cofactor}")
        self.cofactor = cofactor


@dataclass(frozen=True)
class FactoredInteger:
    """A positive integer with its full prime factorization.

    ``factors`` is a tuple of (prime, exponent) pairs with strictly
    increasing primes; omega, tau, mu and pplus are cached at
    construction.
    """

    value: int
    factors: tuple[tuple[int, int], ...]
    omega: int
    tau: int
    mu: int
    pplus: int

    @classmethod
    def from_factors(cls, factors) -> "FactoredInteger":
        factors = tuple((int(p), int(e)) for p, e in factors)
        value = 1
        tau = 1
        squarefree = True
        prev = 1
        for p, e in factors:
            if p <= prev or e < 1:
                raise ValueError(f"factor list not normalized: {factors}")
            prev = p
            value *= p**e
            tau *= e + 1
            if e > 1:
                squarefree = False
        omega = len(factors)
        mu = 0 if not squarefree else (-1) ** omega
        pplus = factors[-1][0] if factors else 1
        return cls(value=value, factors=factors, omega=omega, tau=tau,
                   mu=mu, pplus=pplus)

    def is_squarefree(self) -> bool:
        return self.mu != 0


@dataclass
class SpfSieve:
    """Smallest-prime-factor table for 2..limit (uint32 entries)."""

    limit: int
    spf: np.ndarray

    _primes: np.ndarray | None = field(default=None, repr=False)

    @property
    def primes(self) -> np.ndarray:
        """Sorted array of all primes <= limit."""
        if self._primes is None:
            idx = np.arange(2, self.limit + 1, dtype=np.int64)
            self._primes = idx[self.spf[2:self.limit + 1] == idx]
        return self._primes


@dataclass(frozen=True)
class PrimeRange:
    """The primes in the half-open interval [lo, hi)."""

    lo: int
    hi: int
    primes: np.ndarray


def build_spf_sieve(limit: int, budget: int = SPF_ENTRY_BUDGET) -> SpfSieve:
    """Tabulate the smallest prime factor of every k in 2..limit."""
    if limit < 2:
        raise ValueError("sieve limit must be at least 2")
    if limit + 1 > budget:
        raise ResourceLimitError(
            f"spf sieve of limit {limit} exceeds entry budget {budget}")
    spf = np.zeros(limit + 1, dtype=np.uint32)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            block = spf[p * p::p]
            block[block == 0] = p
    untouched = np.nonzero(spf[2:] == 0)[0] + 2
    spf[untouched] = untouched
    return SpfSieve(limit=limit, spf=spf)


@lru_cache(maxsize=1)
def _fallback_sieve() -> SpfSieve:
    return build_spf_sieve(FALLBACK_TRIAL_LIMIT)


def is_prime(n: int, extra_rounds: int = 24) -> bool:
    """Miller-Rabin; deterministic for n below 3.317e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    bases = list(_MR_BASES)
    if n >= _MR_DET_LIMIT:
        # Past the proven range: append rounds with bases derived from n,
        # keeping the test deterministic per input.
        h = n
        for _ in range(extra_rounds):
            h = (h * 6364136223846793005 + 1442695040888963407) % (2**64)
            bases.append(2 + h % (n - 3))
    for a in bases:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _brent_rho(n: int, seed: int) -> int:
    """One Brent-cycle attempt; returns a nontrivial factor or n."""
    if n % 2 == 0:
        return 2
    c = 1 + seed % (n - 1)
    y, m, g, r, q = 2 + seed % (n - 4), 128, 1, 1, 1
    x = ys = y
    max_iters = 1 << 22
    iters = 0
    while g == 1 and iters < max_iters:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        k = 0
        while k < r and g == 1:
            ys = y
            for _ in range(min(m, r - k)):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            g = math.gcd(q, n)
            k += m
        r *= 2
        iters += r
    if g == n:
        g = 1
        while g == 1:
            ys = (ys * ys + c) % n
            g = math.gcd(abs(x - ys), n)
    return g


def _split_composite(n: int, out: dict, max_restarts: int = 24) -> None:
    """Accumulate the factorization of n (no small factors) into out."""
    if n == 1:
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    root = math.isqrt(n)
    if root * root == n:
        sub: dict[int, int] = {}
        _split_composite(root, sub)
        for p, e in sub.items():
            out[p] = out.get(p, 0) + 2 * e
        return
    for attempt in range(max_restarts):
        g = _brent_rho(n, seed=attempt * 0x9E3779B9 + 1)
        if 1 < g < n:
            _split_composite(g, out)
            _split_composite(n // g, out)
            return
    raise FactoringError(n)


def factorize(n: int, sieve: SpfSieve | None = None) -> FactoredInteger:
    """Factor n >= 1, using the sieve when n is in range.

    Beyond the sieve limit: trial division by sieved primes up to the
    square root, then deterministic Miller-Rabin plus Brent-rho splitting
    for whatever composite remains.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if n == 1:
        return FactoredInteger.from_factors(())
    acc: dict[int, int] = {}
    rem = n
    if sieve is not None and n <= sieve.limit:
        spf = sieve.spf
        while rem > 1:
            p = int(spf[rem])
            e = 0
            while rem % p == 0:
                rem //= p
                e += 1
            acc[p] = e
        return FactoredInteger.from_factors(sorted(acc.items()))

    trial = sieve if sieve is not None else _fallback_sieve()
    for p in trial.primes:
        p = int(p)
        if p * p > rem:
            break
        if rem % p == 0:
            e = 0
            while rem % p == 0:
                rem //= p
                e += 1
            acc[p] = e
    if rem > 1:
        if rem <= trial.limit or rem < int(trial.primes[-1]) ** 2:
            acc[rem] = acc.get(rem, 0) + 1  # below trial bound squared: prime
        else:
            _split_composite(rem, acc)
    return FactoredInteger.from_factors(sorted(acc.items()))


def divisors(f: FactoredInteger, budget: int = DIVISOR_BUDGET) -> list[int]:
    """All divisors of f, strictly increasing."""
    if f.tau > budget:
        raise ResourceLimitError(
            f"tau({f.value}) = {f.tau} exceeds divisor budget {budget}")
    divs = [1]
    for p, e in f.factors:
        block = len(divs)
        pe = 1
        for _ in range(e):
            pe *= p
            divs.extend(divs[i] * pe for i in range(block))
    divs.sort()
    return divs


def smooth_part(f: FactoredInteger, y: float) -> tuple[FactoredInteger, FactoredInteger]:
    """Split f = a*b with all primes of a below y and all primes of b >= y."""
    small = [(p, e) for p, e in f.factors if p < y]
    large = [(p, e) for p, e in f.factors if p >= y]
    return FactoredInteger.from_factors(small), FactoredInteger.from_factors(large)


def _simple_prime_array(limit: int) -> np.ndarray:
    """Primes <= limit by a plain boolean sieve."""
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mask[p]:
            mask[p * p::p] = False
    return np.nonzero(mask)[0].astype(np.int64)


def primes_in_range(lo: int, hi: int,
                    span_budget: int = SEGMENT_SIEVE_SPAN_BUDGET) -> PrimeRange:
    """Primes in [lo, hi) by segmented sieving."""
    if not 2 <= lo <= hi:
        raise ValueError("need 2 <= lo <= hi")
    if hi - lo > span_budget:
        raise ResourceLimitError(
            f"range span {hi - lo} exceeds budget {span_budget}")
    root = math.isqrt(max(hi - 1, 2))
    if root > 2**26:
        raise ResourceLimitError(f"sqrt({hi}) exceeds base-sieve budget")
    base = _simple_prime_array(root)
    out = []
    seg = 1 << 20
    for start in range(lo, hi, seg):
        stop = min(start + seg, hi)
        mask = np.ones(stop - start, dtype=bool)
        if start == 1:
            mask[0] = False
        for p in base:
            p = int(p)
            first = max(p * p, ((start + p - 1) // p) * p)
            if first >= stop:
                continue
            mask[first - start::p] = False
        idx = np.nonzero(mask)[0] + start
        out.append(idx[idx >= 2])
    primes = np.concatenate(out) if out else np.empty(0, dtype=np.int64)
    return PrimeRange(lo=lo, hi=hi, primes=primes.astype(np.int64))
