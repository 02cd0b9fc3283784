"""Exact window counts over divisor logarithms.

The central objects are the sorted array of log d over d | n (kept in
80-bit extended precision) and the integer-valued step function
u -> #{d | n : u < log d <= u + w}.  All window counts reduce to
two-pointer sweeps over the log array; comparisons that land within
1e-9 of a window edge are re-decided exactly with big-integer /
arbitrary-precision arithmetic, so counts never depend on float luck.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np

from .arith import FactoredInteger, divisors

LOG_GUARD = 1e-9


def _exact_log_lt(d_hi: int, d_lo: int, v: float) -> bool:
    """Exact decision of log(d_hi / d_lo) < v.

    v is a binary float, hence exactly rational; e^v is transcendental
    for v != 0, so equality with the rational d_hi/d_lo cannot occur and
    escalating the working precision always terminates.
    """
    if v == 0.0:
        return d_hi < d_lo
    dps = 40
    while True:
        with mpmath.workdps(dps):
            diff = mpmath.log(mpmath.mpf(d_hi)) - mpmath.log(mpmath.mpf(d_lo)) - mpmath.mpf(v)
            if abs(diff) > mpmath.mpf(10) ** (8 - dps):
                return diff < 0
        dps *= 4


@dataclass(frozen=True)
class DivisorLogProfile:
    """Sorted divisors of n together with their natural logs.

    logs is a longdouble (64-bit mantissa) array; divisors the matching
    exact integer list.
    """

    n: int
    logs: np.ndarray
    divisors: list[int]

    def __post_init__(self):
        if len(self.logs) != len(self.divisors):
            raise ValueError("logs/divisors length mismatch")

    @property
    def tau(self) -> int:
        return len(self.divisors)


def delta_profile(f: FactoredInteger) -> DivisorLogProfile:
    """Build the divisor-log profile of f."""
    divs = divisors(f)
    if f.value < 2**63:
        arr = np.array(divs, dtype=np.uint64)
        logs = np.log(arr.astype(np.longdouble))
    else:
        # Big divisors: accumulate logs from the prime factorization so
        # no precision is lost converting huge ints to floats.
        pairs = [(1, np.longdouble(0.0))]
        for p, e in f.factors:
            lp = np.log(np.longdouble(p))
            block = list(pairs)
            pe = 1
            for k in range(1, e + 1):
                pe *= p
                pairs.extend((d * pe, ld + k * lp) for d, ld in block)
        pairs.sort(key=lambda t: t[0])
        divs = [d for d, _ in pairs]
        logs = np.array([ld for _, ld in pairs], dtype=np.longdouble)
    return DivisorLogProfile(n=f.value, logs=logs, divisors=divs)


@dataclass(frozen=True)
class StepFunction:
    """Piecewise-constant nonnegative integer function, zero outside
    [breakpoints[0], breakpoints[-1]).

    values[i] holds on [breakpoints[i], breakpoints[i+1]); canonical
    form merges equal neighbours and trims zero-valued ends.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    @classmethod
    def from_events(cls, points: np.ndarray, jumps: np.ndarray) -> "StepFunction":
        """Build from (position, +-jump) events; result is canonical."""
        order = np.argsort(points, kind="mergesort")
        pts = np.asarray(points, dtype=np.float64)[order]
        run = np.cumsum(np.asarray(jumps, dtype=np.int64)[order])
        # collapse coincident event points; the settled value after each
        # distinct point is the run at its last event
        last = np.nonzero(np.append(np.diff(pts) != 0, True))[0]
        bp = pts[last]
        vals = run[last][:-1]
        return cls._canonical(bp, vals)

    @classmethod
    def _canonical(cls, bp: np.ndarray, vals: np.ndarray) -> "StepFunction":
        if len(bp) < 2:
            return cls(breakpoints=np.empty(0, np.float64), values=np.empty(0, np.int64))
        vals = np.asarray(vals, dtype=np.int64)
        keep = np.nonzero(np.concatenate([[True], np.diff(vals) != 0]))[0]
        bp2 = np.append(bp[keep], bp[-1])
        vals2 = vals[keep]
        lo = 0
        hi = len(vals2)
        while lo < hi and vals2[lo] == 0:
            lo += 1
        while hi > lo and vals2[hi - 1] == 0:
            hi -= 1
        if lo == hi:
            return cls(breakpoints=np.empty(0, np.float64), values=np.empty(0, np.int64))
        return cls(breakpoints=np.ascontiguousarray(bp2[lo:hi + 1]),
                   values=np.ascontiguousarray(vals2[lo:hi]))

    def __call__(self, u: float) -> int:
        if len(self.values) == 0:
            return 0
        i = int(np.searchsorted(self.breakpoints, u, side="right")) - 1
        if i < 0 or i >= len(self.values):
            return 0
        return int(self.values[i])

    def max_value(self) -> int:
        return int(self.values.max()) if len(self.values) else 0

    def integral(self, power: int = 1) -> float:
        if len(self.values) == 0:
            return 0.0
        lengths = np.diff(self.breakpoints)
        return float(np.sum(self.values.astype(np.float64) ** power * lengths))

    def shifted(self, s: float) -> "StepFunction":
        return StepFunction(breakpoints=self.breakpoints + s, values=self.values)

    def __add__(self, other: "StepFunction") -> "StepFunction":
        if len(self.values) == 0:
            return other
        if len(other.values) == 0:
            return self
        bp = np.union1d(self.breakpoints, other.breakpoints)
        mids = (bp[:-1] + bp[1:]) / 2.0
        vals = np.fromiter((self(u) + other(u) for u in mids), dtype=np.int64,
                           count=len(mids))
        return StepFunction._canonical(bp, vals)

    def __eq__(self, other) -> bool:
        if not isinstance(other, StepFunction):
            return NotImplemented
        return (self.breakpoints.shape == other.breakpoints.shape
                and np.array_equal(self.breakpoints, other.breakpoints)
                and np.array_equal(self.values, other.values))

    def approx_equal(self, other: "StepFunction", tol: float = 1e-9) -> bool:
        """Same integer plateau values, breakpoints within tol."""
        if self.breakpoints.shape != other.breakpoints.shape:
            return False
        if not np.array_equal(self.values, other.values):
            return False
        if len(self.breakpoints) == 0:
            return True
        return float(np.max(np.abs(self.breakpoints - other.breakpoints))) <= tol


def delta_step_function(p: DivisorLogProfile, shift: float = 0.0,
                        window: float = 1.0) -> StepFunction:
    """The function u -> #{d | n : u < log d - shift <= u + window}."""
    if window <= 0:
        raise ValueError("window must be positive")
    logs = p.logs.astype(np.float64) - shift
    points = np.concatenate([logs - window, logs])
    jumps = np.concatenate([np.ones(len(logs), np.int64), -np.ones(len(logs), np.int64)])
    return StepFunction.from_events(points, jumps)


def delta_max(p: DivisorLogProfile, window: float = 1.0) -> int:
    """max_u of the window count: two-pointer sweep over sorted logs.

    The supremum is attained just below some log d, so it equals
    max_i #{j : log d_i <= log d_j < log d_i + window}.
    """
    if window <= 0:
        raise ValueError("window must be positive")
    logs = p.logs
    n = len(logs)
    targets = logs + np.longdouble(window)
    hi = np.searchsorted(logs, targets, side="left")
    counts = hi - np.arange(n)
    # border fixes: entries within the guard band of an edge get decided
    # exactly (d_j < d_i * e^window as integers vs a transcendental)
    suspect_hi = np.nonzero((hi < n) &
                            (logs[np.minimum(hi, n - 1)] - targets <= LOG_GUARD))[0]
    for i in suspect_hi:
        j = int(hi[i])
        while j < n and logs[j] - targets[i] <= LOG_GUARD:
            if _exact_log_lt(p.divisors[j], p.divisors[i], window):
                counts[i] += 1
                j += 1
            else:
                break
    suspect_lo = np.nonzero((hi > 0) &
                            (targets - logs[np.maximum(hi - 1, 0)] <= LOG_GUARD))[0]
    for i in suspect_lo:
        j = int(hi[i]) - 1
        while j > i and targets[i] - logs[j] <= LOG_GUARD:
            if not _exact_log_lt(p.divisors[j], p.divisors[i], window):
                counts[i] -= 1
                j -= 1
            else:
                break
    return int(counts.max())


def _window_bounds(p: DivisorLogProfile, v: float, closed: bool):
    """Index ranges [lo_i, hi_i) of j with |log d_j - log d_i| <= v (closed)
    or < v, guard-corrected exactly."""
    logs = p.logs
    n = len(logs)
    vv = np.longdouble(v)
    side_hi = "right" if closed else "left"
    side_lo = "left" if closed else "right"
    hi = np.searchsorted(logs, logs + vv, side=side_hi)
    lo = np.searchsorted(logs, logs - vv, side=side_lo)
    # exact fixes near both edges (<= and < coincide: no exact ties for
    # float v != 0)
    for i in range(n):
        t_hi = logs[i] + vv
        j = int(hi[i])
        while j < n and logs[j] - t_hi <= LOG_GUARD:
            if _exact_log_lt(p.divisors[j], p.divisors[i], v):
                j += 1
            else:
                break
        hi[i] = j
        j = int(hi[i]) - 1
        while j > i and t_hi - logs[j] <= LOG_GUARD:
            if not _exact_log_lt(p.divisors[j], p.divisors[i], v):
                j -= 1
            else:
                break
        hi[i] = j + 1
        t_lo = logs[i] - vv
        j = int(lo[i]) - 1
        while j >= 0 and t_lo - logs[j] <= LOG_GUARD:
            if _exact_log_lt(p.divisors[i], p.divisors[j], v):
                j -= 1
            else:
                break
        lo[i] = j + 1
        j = int(lo[i])
        while j < i and logs[j] - t_lo <= LOG_GUARD:
            if not _exact_log_lt(p.divisors[i], p.divisors[j], v):
                j += 1
            else:
                break
        lo[i] = j
    return lo, hi


def pair_count_T0(p: DivisorLogProfile, v: float = 1.0) -> int:
    """Ordered divisor pairs (d, d') with |log(d'/d)| <= v."""
    if v <= 0:
        raise ValueError("v must be positive")
    lo, hi = _window_bounds(p, v, closed=True)
    return int(np.sum(hi - lo))


def autocorrelation_integral(p: DivisorLogProfile, v: float) -> float:
    """Sum over ordered divisor pairs of max(0, v - |log(d'/d)|).

    This equals the integral over s of the squared width-v window count,
    exactly (overlap length of two length-v windows).
    """
    if v <= 0:
        raise ValueError("v must be positive")
    logs = p.logs
    n = len(logs)
    lo, hi = _window_bounds(p, v, closed=True)
    prefix = np.concatenate([[np.longdouble(0.0)], np.cumsum(logs)])
    idx = np.arange(n)
    vv = np.longdouble(v)
    # j in [lo_i, i]: terms v - (L_i - L_j); j in (i, hi_i): v - (L_j - L_i)
    cnt_lo = idx - lo + 1
    cnt_hi = hi - idx - 1
    below = cnt_lo * vv - cnt_lo * logs + (prefix[idx + 1] - prefix[lo])
    above = cnt_hi * vv + cnt_hi * logs - (prefix[hi] - prefix[idx + 1])
    return float(np.sum(below) + np.sum(above))
