"""Sampling from the independent-prime-inclusion model and the Monte
Carlo estimators built on it.

A draw includes each prime p of the range [y, x) independently with
probability 1/(p+1); the product law is then exactly the measure that
weights a squarefree n by (1/n) prod (1+1/p)^{-1}.  Streams are keyed by
(seed, sample index), so results cannot depend on batching or thread
count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .arith import FactoredInteger, PrimeRange, primes_in_range
from .delta import delta_max, delta_profile
from .fourier import d_y
from .moments import moment


@dataclass
class MeasureSpec:
    """Parameters (y, x, seed) of the random model plus its prime range."""

    y: float
    x: float
    seed: int
    primes: PrimeRange = None

    def __post_init__(self):
        if not 2 <= self.y < self.x:
            raise ValueError("need 2 <= y < x")
        if self.primes is None:
            self.primes = primes_in_range(math.ceil(self.y), math.ceil(self.x))
        p = self.primes.primes.astype(np.float64)
        # survival prefix: cumulative log prod of (1 - 1/(p+1)) = p/(p+1)
        self._log_survival = np.concatenate([[0.0],
                                             np.cumsum(np.log(p / (p + 1.0)))])
        self._neg_survival = -self._log_survival

    def atom_probability(self, f: FactoredInteger) -> float:
        """Exact point mass of a squarefree integer on this support."""
        prob = 1.0
        included = {p for p, _ in f.factors}
        for p in self.primes.primes:
            p = int(p)
            prob *= (1.0 / (p + 1.0)) if p in included else (p / (p + 1.0))
        return prob


def _sample_rng(seed: int, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return np.random.Generator(np.random.PCG64(ss))


def _draw_factors(spec: MeasureSpec, rng: np.random.Generator) -> tuple:
    """One draw: included primes found by geometric skipping.

    With survival prefix S_i = sum log p_k/(p_k+1), the first inclusion
    at or after pos is the smallest j with S_{j+1} < S_pos + log u,
    which one binary search per included prime locates.
    """
    surv = spec._log_survival
    neg = spec._neg_survival
    m = len(spec.primes.primes)
    out = []
    pos = 0
    while pos < m:
        u = rng.random()
        if u <= 0.0:
            break
        target = surv[pos] + math.log(u)
        j = int(np.searchsorted(neg, -target, side="right")) - 1
        if j >= m:
            break
        out.append((int(spec.primes.primes[j]), 1))
        pos = j + 1
    return tuple(out)


def sample(spec: MeasureSpec, count: int, start_index: int = 0) -> Iterator[FactoredInteger]:
    """Stream of `count` independent draws, factored form."""
    if count < 1:
        raise ValueError("count must be positive")
    for idx in range(start_index, start_index + count):
        rng = _sample_rng(spec.seed, idx)
        yield FactoredInteger.from_factors(_draw_factors(spec, rng))


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n_samples: int
    seed: int
    ci95: tuple[float, float]
    n_failures: int = 0
    valid: bool = True


def _finish(total: float, total_sq: float, k: int, seed: int,
            n_failures: int) -> McEstimate:
    mean = total / k if k else math.nan
    if k >= 2:
        var = max(0.0, (total_sq - total * total / k) / (k - 1))
        stderr = math.sqrt(var / k)
    else:
        stderr = 0.0
    attempted = k + n_failures
    valid = k > 0 and (n_failures <= 0.01 * attempted)
    return McEstimate(mean=mean, stderr=stderr, n_samples=k, seed=seed,
                      ci95=(mean - 1.96 * stderr, mean + 1.96 * stderr),
                      n_failures=n_failures, valid=valid)


def estimate_expectation(spec: MeasureSpec,
                         statistic: Callable[[FactoredInteger], float],
                         count: int) -> McEstimate:
    """Sample mean and standard error of the statistic under the model.

    Failing samples are dropped and counted; the estimate is flagged
    invalid when more than 1% fail.
    """
    total = 0.0
    total_sq = 0.0
    k = 0
    failures = 0
    for f in sample(spec, count):
        try:
            v = float(statistic(f))
        except Exception:
            failures += 1
            continue
        total += v
        total_sq += v * v
        k += 1
    return _finish(total, total_sq, k, spec.seed, failures)


@dataclass(frozen=True)
class FiberIndicator:
    """Indicator of squarefree integers with exactly k prime factors."""

    k: int

    def __call__(self, f: FactoredInteger) -> int:
        return 1 if (f.mu != 0 and f.omega == self.k) else 0


@dataclass(frozen=True)
class FiberReport:
    y: float
    k: int
    h: float
    estimate: McEstimate
    model: float
    ratio: float


def fiber_probability(y: float, k: int, count: int, seed: int) -> FiberReport:
    """Monte Carlo P(omega = k) under the 2..y model, with the
    (h log 2)^k / (2^h k!) reference value at h = log2 log y."""
    if y < 4:
        raise ValueError("y must be at least 4")
    spec = MeasureSpec(y=2.0, x=float(y), seed=seed)
    est = estimate_expectation(spec, FiberIndicator(k), count)
    h = math.log2(math.log(y))
    model = (h * math.log(2.0)) ** k / (2.0 ** h * math.factorial(k))
    ratio = est.mean / model if model > 0 else math.inf
    return FiberReport(y=y, k=k, h=h, estimate=est, model=model, ratio=ratio)


@dataclass(frozen=True)
class TailRow:
    T: float
    estimate: float
    stderr: float
    lower_envelope: float
    upper_envelope: float


def m2_over_tau(f: FactoredInteger) -> float:
    return moment(f, 2) / f.tau


def tail_probability_m2(x: float, T_grid: list[float], count: int,
                        seed: int) -> list[TailRow]:
    """P(M_2/tau > T) for each T on a shared sample set, with the
    1/(T sqrt(log T)) and log T / T envelope columns."""
    if any(T < 3 for T in T_grid):
        raise ValueError("every T must be at least 3")
    spec = MeasureSpec(y=2.0, x=float(x), seed=seed)
    stats = np.fromiter((m2_over_tau(f) for f in sample(spec, count)),
                        dtype=np.float64, count=count)
    rows = []
    for T in T_grid:
        p_hat = float(np.mean(stats > T))
        stderr = math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / count)
        lt = math.log(T)
        rows.append(TailRow(T=T, estimate=p_hat, stderr=stderr,
                            lower_envelope=1.0 / (T * math.sqrt(lt)),
                            upper_envelope=lt / T))
    return rows


@dataclass(frozen=True)
class DyReport:
    y: float
    x: float
    estimate: McEstimate
    loglog_x: float
    ratio: float


def d_y_expectation(y: float, x: float, count: int, seed: int) -> DyReport:
    """Monte Carlo mean of the Fourier energy of draws from [y, x)."""
    spec = MeasureSpec(y=float(y), x=float(x), seed=seed)
    est = estimate_expectation(spec, lambda f: d_y(f, y).value, count)
    llx = math.log(math.log(x))
    return DyReport(y=y, x=x, estimate=est, loglog_x=llx,
                    ratio=est.mean / llx)


def delta_statistic(f: FactoredInteger) -> float:
    """Delta(n) as a sample statistic."""
    return float(delta_max(delta_profile(f)))
