"""High-throughput exact summation of the window maximum.

Segments of [1, x] are processed independently: a factor table is built
by crossing off the primes up to sqrt, divisor logs are generated from
the factorizations, and a two-pointer sweep reads off each Delta(n).
Per-segment partial sums are integers, so the reduction is exact and
independent of chunking and thread count.

Float-64 logs are provably safe here: any divisor pair d < d' of an
n <= 2^32 has its reduced ratio p/q with pq <= n, and the best rational
approximations to e with pq <= 2^32 stay 9.7e-11 away in log, four
orders above the accumulated log error.  The general-precision path in
delta.py covers everything larger.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numba
import numpy as np
from numba import njit, prange

from .arith import (FactoredInteger, ResourceLimitError, FactoringError,
                    _simple_prime_array, build_spf_sieve, factorize)
from .delta import delta_max, delta_profile

SUM_LIMIT_DEFAULT = 10**9
WEIGHTED_X_BUDGET = 10**6
POLY_X_BUDGET = 10**5
POLY_VALUE_BUDGET = 10**18
_LOG_BUFFER = 8192


@njit(cache=True, nogil=True)
def _segment_deltas(lo, hi, primes, out):
    """Delta(n) for n in [lo, hi) into out[0 : hi-lo]."""
    m = hi - lo
    rem = np.empty(m, np.int64)
    for i in range(m):
        rem[i] = lo + i
    fp = np.zeros((m, 12), np.int64)
    fe = np.zeros((m, 12), np.uint8)
    fc = np.zeros(m, np.uint8)
    for idx in range(len(primes)):
        p = primes[idx]
        if p * p >= hi:
            break
        start = ((lo + p - 1) // p) * p
        for v in range(start, hi, p):
            i = v - lo
            e = 0
            r = rem[i]
            while r % p == 0:
                r //= p
                e += 1
            rem[i] = r
            k = fc[i]
            fp[i, k] = p
            fe[i, k] = e
            fc[i] = k + 1
    logs = np.empty(_LOG_BUFFER, np.float64)
    for i in range(m):
        n = lo + i
        if n < 1:
            out[i] = 0
            continue
        if n == 1:
            out[i] = 1
            continue
        sz = 1
        logs[0] = 0.0
        for k in range(fc[i]):
            e = int(fe[i, k])
            lp = np.log(np.float64(fp[i, k]))
            base = sz
            if base * (e + 1) > _LOG_BUFFER:
                raise ValueError("divisor buffer exceeded")
            for t in range(1, e + 1):
                off = base * t
                add = t * lp
                for s in range(base):
                    logs[off + s] = logs[s] + add
            sz = base * (e + 1)
        if rem[i] > 1:
            if 2 * sz > _LOG_BUFFER:
                raise ValueError("divisor buffer exceeded")
            lp = np.log(np.float64(rem[i]))
            for s in range(sz):
                logs[sz + s] = logs[s] + lp
            sz *= 2
        sub = logs[:sz]
        sub.sort()
        best = 1
        j = 0
        for a in range(sz):
            if j < a:
                j = a
            lim = logs[a] + 1.0
            while j < sz and logs[j] < lim:
                j += 1
            if j - a > best:
                best = j - a
        out[i] = best


@njit(cache=True, nogil=True)
def _segment_delta_sum(lo, hi, primes):
    out = np.empty(hi - lo, np.int32)
    _segment_deltas(lo, hi, primes, out)
    total = np.int64(0)
    for i in range(hi - lo):
        total += out[i]
    return total


@njit(cache=True, parallel=True)
def _delta_sum_range(lo, hi, primes, chunk):
    nseg = (hi - lo + chunk - 1) // chunk
    partial = np.zeros(nseg, np.int64)
    for s in prange(nseg):
        a = lo + s * chunk
        b = min(a + chunk, hi)
        partial[s] = _segment_delta_sum(a, b, primes)
    return partial.sum()


def _base_primes(x: int) -> np.ndarray:
    primes = _simple_prime_array(max(math.isqrt(max(x, 4)), 3))
    if len(primes) == 0:
        primes = np.array([2], dtype=np.int64)
    return primes


def set_threads(threads: int | None) -> int:
    """Clamp and apply the numba thread count; returns what was set."""
    cap = numba.config.NUMBA_NUM_THREADS
    k = cap if threads is None else max(1, min(int(threads), cap))
    numba.set_num_threads(k)
    return k


@dataclass
class SumJob:
    x: int
    mode: str = "plain"
    weight: object = None
    poly: Sequence[int] | None = None
    chunk: int = 1 << 16
    threads: int | None = None
    limit: int = SUM_LIMIT_DEFAULT

    def __post_init__(self):
        if self.x < 1 or self.chunk < 1:
            raise ValueError("x and chunk must be positive")
        if self.mode not in ("plain", "weighted", "polynomial"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class GrowthRow:
    x: int
    s: int
    s_over_x: float
    norm_1: float
    norm_3_2: float
    norm_2: float
    norm_5_2: float

    @classmethod
    def build(cls, x: int, s: int) -> "GrowthRow":
        sx = s / x
        ll = math.log(math.log(x)) if x > 3 else math.nan
        norms = [sx / ll ** c if ll and ll > 0 else math.nan
                 for c in (1.0, 1.5, 2.0, 2.5)]
        return cls(x=x, s=s, s_over_x=sx, norm_1=norms[0], norm_3_2=norms[1],
                   norm_2=norms[2], norm_5_2=norms[3])


GROWTH_CAVEAT = ("normalized columns are for inspection only: log log x "
                 "spans too little at these x to separate nearby exponents")


@dataclass
class GrowthTable:
    rows: list[GrowthRow] = field(default_factory=list)
    caveat: str = GROWTH_CAVEAT
    truncated: bool = False


def _checkpoints(x: int) -> list[int]:
    cps = [10**k for k in range(1, 19) if 10**k < x]
    cps.append(x)
    return cps


def sum_delta(job: SumJob) -> GrowthTable:
    """Exact S(x) with a growth row at each decade checkpoint."""
    if job.x > job.limit:
        raise ResourceLimitError(f"x={job.x} exceeds limit {job.limit}")
    set_threads(job.threads)
    primes = _base_primes(job.x)
    table = GrowthTable()
    total = 0
    prev = 1
    for cp in _checkpoints(job.x):
        total += int(_delta_sum_range(prev, cp + 1, primes,
                                      min(job.chunk, cp + 1 - prev)))
        table.rows.append(GrowthRow.build(cp, total))
        prev = cp + 1
    return table


def delta_values_upto(x: int, threads: int | None = None,
                      chunk: int = 1 << 16) -> np.ndarray:
    """Array d with d[n-1] = Delta(n) for 1 <= n <= x."""
    if x > SUM_LIMIT_DEFAULT:
        raise ResourceLimitError(f"x={x} exceeds limit {SUM_LIMIT_DEFAULT}")
    set_threads(threads)
    primes = _base_primes(x)
    out = np.empty(x, np.int32)
    for a in range(1, x + 1, chunk):
        b = min(a + chunk, x + 1)
        _segment_deltas(a, b, primes, out[a - 1:b - 1])
    return out


def _resolve_weight(weight) -> Callable[[int, int], float]:
    if weight is None or weight == "one":
        return lambda p, e: 1.0
    if weight == "squarefree":
        return lambda p, e: 1.0 if e == 1 else 0.0
    if isinstance(weight, dict):
        return lambda p, e: float(weight.get(p, 1.0)) ** e
    if callable(weight):
        return weight
    raise ValueError(f"cannot interpret weight spec {weight!r}")


def sum_delta_weighted(job: SumJob) -> float:
    """Sum of g(n) Delta(n) for a nonnegative multiplicative weight g."""
    if job.x > WEIGHTED_X_BUDGET:
        raise ResourceLimitError(
            f"weighted mode capped at x={WEIGHTED_X_BUDGET}")
    g_pp = _resolve_weight(job.weight)
    deltas = delta_values_upto(job.x, threads=job.threads, chunk=job.chunk)
    sieve = build_spf_sieve(max(job.x, 2))
    total = 1.0 * deltas[0]  # n = 1: empty product, g(1) = 1
    for n in range(2, job.x + 1):
        f = factorize(n, sieve)
        g = 1.0
        for p, e in f.factors:
            val = g_pp(p, e)
            if val < 0:
                raise ValueError(f"weight is negative at {p}^{e}")
            g *= val
            if g == 0.0:
                break
        total += g * float(deltas[n - 1])
    return total


@dataclass
class PolySumResult:
    x: int
    total: int
    rows: list[GrowthRow]
    skipped: int
    failures: list[int]


def eval_poly(coeffs: Sequence[int], n: int) -> int:
    """Evaluate sum c_k n^k exactly (coefficients in ascending order)."""
    acc = 0
    for c in reversed(list(coeffs)):
        acc = acc * n + c
    return acc


def sum_delta_poly(job: SumJob) -> PolySumResult:
    """Sum of Delta(|F(n)|) over n <= x; zeros of F are skipped and
    counted, factoring failures abort past a 0.1% share."""
    coeffs = list(job.poly or ())
    if len(coeffs) < 2 or all(c == 0 for c in coeffs[1:]):
        raise ValueError("polynomial must be non-constant")
    if job.x > POLY_X_BUDGET:
        raise ResourceLimitError(f"polynomial mode capped at x={POLY_X_BUDGET}")
    total = 0
    skipped = 0
    failures: list[int] = []
    for n in range(1, job.x + 1):
        val = abs(eval_poly(coeffs, n))
        if val == 0:
            skipped += 1
            continue
        if val > POLY_VALUE_BUDGET:
            raise ResourceLimitError(
                f"|F({n})| = {val} exceeds factoring budget {POLY_VALUE_BUDGET}")
        try:
            f = factorize(val)
        except FactoringError:
            failures.append(n)
            if len(failures) > max(1, job.x // 1000):
                raise
            continue
        total += delta_max(delta_profile(f))
    return PolySumResult(x=job.x, total=total,
                         rows=[GrowthRow.build(job.x, total)],
                         skipped=skipped, failures=failures)


def exact_expectation_small(x: float) -> float:
    """Exact mean of Delta under the full random model on primes < x.

    Enumerates the whole support (2^pi(x) squarefree integers), so pi(x)
    is capped at 8.
    """
    primes = [int(p) for p in _simple_prime_array(max(int(math.ceil(x)) - 1, 1))]
    if len(primes) > 8:
        raise ResourceLimitError(
            f"support of {len(primes)} primes is past the enumeration cap")
    norm = Fraction(1)
    for p in primes:
        norm *= Fraction(p, p + 1)
    total = Fraction(0)
    for mask in range(1 << len(primes)):
        factors = tuple((primes[i], 1) for i in range(len(primes))
                        if mask >> i & 1)
        f = FactoredInteger.from_factors(factors)
        d = delta_max(delta_profile(f))
        total += Fraction(d, f.value)
    return float(norm * total)
