"""Exact moment integrals of the divisor window count.

M_q(n) integrates the q-th power of u -> Delta(n, u) by an event sweep
over the 2*tau(n) breakpoints; no quadrature is involved anywhere in
this module (quadrature appears only as a test oracle).  Accumulation is
compensated in extended precision because plateau values raised to large
q overflow doubles long before they overflow float128.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arith import FactoredInteger, ResourceLimitError, is_prime
from .delta import DivisorLogProfile, delta_profile

Q_MAX = 64


def _kahan_sum(terms: np.ndarray) -> np.longdouble:
    s = np.longdouble(0.0)
    c = np.longdouble(0.0)
    for t in terms:
        y = t - c
        u = s + y
        c = (u - s) - y
        s = u
    return s


def _level_sets(profile: DivisorLogProfile, window: float = 1.0):
    """Plateau values and lengths of u -> Delta(n, u) on its support."""
    logs = profile.logs
    w = np.longdouble(window)
    points = np.concatenate([logs - w, logs])
    jumps = np.concatenate([np.ones(len(logs), np.int64),
                            -np.ones(len(logs), np.int64)])
    order = np.argsort(points, kind="mergesort")
    pts = points[order]
    run = np.cumsum(jumps[order])
    lengths = np.diff(pts)
    values = run[:-1]
    mask = lengths > 0
    return values[mask], lengths[mask]


def _power_dot(values: np.ndarray, lengths: np.ndarray, q: int) -> float:
    pw = values.astype(np.longdouble) ** q
    total = _kahan_sum(pw * lengths)
    if not np.isfinite(total):
        raise OverflowError(f"value^{q} overflowed extended precision")
    return float(total)


@dataclass(frozen=True)
class MomentVector:
    """M_q(n) for 1 <= q <= q_max; values[q] indexed directly by q."""

    n: int
    q_max: int
    values: np.ndarray


def moment(f: FactoredInteger, q: int,
           profile: DivisorLogProfile | None = None) -> float:
    """The integral over u of Delta(n, u)^q, exactly."""
    if not 1 <= q <= Q_MAX:
        raise ValueError(f"q must be in 1..{Q_MAX}")
    if profile is None:
        profile = delta_profile(f)
    values, lengths = _level_sets(profile)
    return _power_dot(values, lengths, q)


def moment_vector(f: FactoredInteger, q_max: int,
                  profile: DivisorLogProfile | None = None) -> MomentVector:
    """All moments M_1..M_q_max from a single event sweep."""
    if not 1 <= q_max <= Q_MAX:
        raise ValueError(f"q_max must be in 1..{Q_MAX}")
    if profile is None:
        profile = delta_profile(f)
    values, lengths = _level_sets(profile)
    out = np.zeros(q_max + 1, dtype=np.float64)
    for q in range(1, q_max + 1):
        out[q] = _power_dot(values, lengths, q)
    return MomentVector(n=f.value, q_max=q_max, values=out)


def _merged_levels(profile: DivisorLogProfile, log_p: np.longdouble):
    """Joint plateaus of Delta(n, u) and Delta(n, u - log p).

    Returns (vals_a, vals_b, lengths) over the merged breakpoint
    partition.
    """
    logs = profile.logs
    one = np.longdouble(1.0)
    pts = np.concatenate([logs - one, logs, logs + (log_p - one), logs + log_p])
    t = len(logs)
    da = np.concatenate([np.ones(t, np.int64), -np.ones(t, np.int64),
                         np.zeros(t, np.int64), np.zeros(t, np.int64)])
    db = np.concatenate([np.zeros(t, np.int64), np.zeros(t, np.int64),
                         np.ones(t, np.int64), -np.ones(t, np.int64)])
    order = np.argsort(pts, kind="mergesort")
    pts = pts[order]
    ra = np.cumsum(da[order])
    rb = np.cumsum(db[order])
    lengths = np.diff(pts)
    mask = lengths > 0
    return ra[:-1][mask], rb[:-1][mask], lengths[mask]


def _check_shift_prime(f: FactoredInteger, p: int) -> None:
    if any(p == pp for pp, _ in f.factors):
        raise ValueError(f"p={p} divides n={f.value}")
    if not is_prime(p):
        raise ValueError(f"p={p} is not prime")


def cross_moment(f: FactoredInteger, p: int, j: int, q: int,
                 profile: DivisorLogProfile | None = None) -> float:
    """Integral of Delta(n,u)^j * Delta(n, u - log p)^(q-j) du."""
    if not 0 <= j <= q:
        raise ValueError("need 0 <= j <= q")
    if q > Q_MAX:
        raise ValueError(f"q must be at most {Q_MAX}")
    _check_shift_prime(f, p)
    if profile is None:
        profile = delta_profile(f)
    va, vb, lengths = _merged_levels(profile, np.log(np.longdouble(p)))
    pa = va.astype(np.longdouble) ** j
    pb = vb.astype(np.longdouble) ** (q - j)
    total = _kahan_sum(pa * pb * lengths)
    if not np.isfinite(total):
        raise OverflowError("cross moment overflowed extended precision")
    return float(total)


def w_term(f: FactoredInteger, p: int, q: int,
           profile: DivisorLogProfile | None = None) -> float:
    """Binomial-weighted sum of the cross moments over 1 <= j <= q/2."""
    if q < 2:
        raise ValueError("q must be at least 2")
    _check_shift_prime(f, p)
    if profile is None:
        profile = delta_profile(f)
    va, vb, lengths = _merged_levels(profile, np.log(np.longdouble(p)))
    la = va.astype(np.longdouble)
    lb = vb.astype(np.longdouble)
    total = np.longdouble(0.0)
    for j in range(1, q // 2 + 1):
        total += math.comb(q, j) * _kahan_sum((la ** j) * (lb ** (q - j)) * lengths)
    if not np.isfinite(total):
        raise OverflowError("w term overflowed extended precision")
    return float(total)


@dataclass(frozen=True)
class InductiveReport:
    n: int
    p: int
    q: int
    lhs: float   # 2 M_q(n)
    mid: float   # M_q(np)
    rhs: float   # 2 M_q(n) + 2 W_q(n, p)
    passed: bool


def check_inductive_inequality(f: FactoredInteger, p: int, q: int,
                               rel_tol: float = 1e-9) -> InductiveReport:
    """Check 2 M_q(n) <= M_q(np) <= 2 M_q(n) + 2 W_q(n, p).

    The middle member is computed from the actual divisor profile of
    n*p, not from the splitting identity, so the two routes are
    independent.
    """
    if q < 2:
        raise ValueError("q must be at least 2")
    _check_shift_prime(f, p)
    profile = delta_profile(f)
    mq = moment(f, q, profile=profile)
    lhs = 2.0 * mq
    rhs = lhs + 2.0 * w_term(f, p, q, profile=profile)
    f_np = FactoredInteger.from_factors(sorted(f.factors + ((p, 1),)))
    mid = moment(f_np, q)
    slack_lo = rel_tol * max(1.0, abs(lhs))
    slack_hi = rel_tol * max(1.0, abs(rhs))
    passed = (lhs <= mid + slack_lo) and (mid <= rhs + slack_hi)
    return InductiveReport(n=f.value, p=p, q=q, lhs=lhs, mid=mid, rhs=rhs,
                           passed=passed)


def sq_estimator(x: int, q: int, params, max_support_primes: int = 20) -> float:
    """Normalized moment sum over the constrained support of primes < x.

    Enumerates every squarefree integer composed of primes below x
    (2^pi(x) of them, so pi(x) is budgeted), keeps those in the
    (q-1)-level constrained set, and returns
    prod_{p<x}(1+1/p)^{-1} * sum M_q(n) / (n tau(n)).
    """
    from .arith import primes_in_range
    from .etsets import in_E_q_T

    if q < 1:
        raise ValueError("q must be at least 1")
    primes = [int(p) for p in primes_in_range(2, max(int(x), 2)).primes]
    if len(primes) > max_support_primes:
        raise ResourceLimitError(
            f"pi({x}) = {len(primes)} support primes exceed budget "
            f"{max_support_primes}")
    norm = 1.0
    for p in primes:
        norm *= 1.0 / (1.0 + 1.0 / p)

    total = 0.0
    stack = [(0, ())]
    while stack:
        i, factors = stack.pop()
        if i == len(primes):
            f = FactoredInteger.from_factors(factors)
            if in_E_q_T(f, q - 1, params):
                total += moment(f, q) / (f.value * f.tau)
            continue
        stack.append((i + 1, factors))
        stack.append((i + 1, factors + ((primes[i], 1),)))
    return norm * total
