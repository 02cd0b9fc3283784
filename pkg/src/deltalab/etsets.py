"""Membership tests for the nested constrained sets E, E_T, E_T*, E_{q,T}.

The E_T condition quantifies over every real y >= 1.  Since the smooth
divisor count tau(n_y) only jumps at y = p for p | n, it is enough to
compare each level against the infimum of the right-hand side
T (log 3y) e^{-f_T(y)} on each constancy interval.  In s = log log 3y
coordinates the log of that bound is piecewise {affine increasing,
concave}, so the infimum sits at an interval endpoint or at one of the
two branch-crossing points of f_T, both available in closed form; no
grid or search is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .arith import FactoredInteger
from .moments import moment, moment_vector

B_CONST = 1.0 / (math.log(4.0) - 1.0)


class ConfigurationError(Exception):
    """A supplied parameter sequence does not cover the requested range."""


@dataclass(frozen=True)
class EtParams:
    """Parameters (T, delta) of the constrained sets.

    theta_seq, when given, supplies the moment thresholds explicitly
    (index j); otherwise the closed-form default with constant c0 is
    used, which has theta_0 = theta_1 = 1.
    """

    T: float
    delta: float = 0.01
    b_const: float = B_CONST
    theta_seq: tuple[float, ...] | None = None
    c0: float = 1.0

    def __post_init__(self):
        if self.T < 3:
            raise ValueError("T must be at least 3")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")

    def theta(self, j: int) -> float:
        if j < 0:
            raise ValueError("theta index must be nonnegative")
        if self.theta_seq is not None:
            if j >= len(self.theta_seq):
                raise ConfigurationError(
                    f"theta_seq of length {len(self.theta_seq)} has no entry {j}")
            return self.theta_seq[j]
        if j <= 1:
            return 1.0
        log_t = math.log(self.T)
        return (math.factorial(j) / j**2
                * (2.0 * math.pi**2 * self.c0 / 3.0) ** (j - 1)
                * self.T ** (j - 1) * log_t ** ((j - 1) / 2.0))


@dataclass(frozen=True)
class MembershipReport:
    n: int
    in_E: bool
    in_ET: bool
    in_ETstar: bool
    in_EqT: tuple[bool, ...]
    witness_y: float | None = None


def f_T(y: float, params: EtParams) -> float:
    """The shaping exponent: delta * min of the two branches, literally."""
    if y < 1:
        raise ValueError("y must be at least 1")
    log3y = math.log(3.0 * y)
    branch_a = math.log(params.T * log3y)
    branch_b = (math.log(log3y) - params.b_const * math.log(params.T)) ** 2 \
        / math.log(params.T)
    return params.delta * min(branch_a, branch_b)


def _bound_log(s: float, params: EtParams) -> float:
    """log of (log 3y) e^{-f_T(y)} at s = log log 3y."""
    log_t = math.log(params.T)
    c = params.b_const * log_t
    return s - params.delta * min(log_t + s, (s - c) ** 2 / log_t)


def _branch_crossings(params: EtParams) -> tuple[float, float]:
    log_t = math.log(params.T)
    b = params.b_const
    root = math.sqrt(4.0 * b + 5.0)
    return (log_t * (2.0 * b + 1.0 - root) / 2.0,
            log_t * (2.0 * b + 1.0 + root) / 2.0)


def _interval_min(s_lo: float, s_hi: float | None, params: EtParams):
    """(min, argmin) of _bound_log over [s_lo, s_hi] ([s_lo, inf))."""
    cands = [s_lo]
    if s_hi is not None:
        cands.append(s_hi)
    for r in _branch_crossings(params):
        if r >= s_lo and (s_hi is None or r <= s_hi):
            cands.append(r)
    best_s = min(cands, key=lambda s: _bound_log(s, params))
    return _bound_log(best_s, params), best_s


def _s_of_y(y: float) -> float:
    return math.log(math.log(3.0 * y))


def _y_of_s(s: float) -> float:
    t = math.exp(s)
    if t > 700.0:
        return math.inf
    return math.exp(t) / 3.0


def in_E_T(f: FactoredInteger, params: EtParams) -> tuple[bool, float | None]:
    """Whether the smooth divisor counts stay under the shaped bound for
    every y >= 1; returns a violating y when there is one."""
    if f.mu == 0:
        return False, None
    jump_primes = [p for p, _ in f.factors]
    log_t = math.log(params.T)
    edges = [1.0] + [float(p) for p in jump_primes]
    for i, y_lo in enumerate(edges):
        y_hi = edges[i + 1] if i + 1 < len(edges) else None
        s_lo = _s_of_y(y_lo)
        s_hi = _s_of_y(y_hi) if y_hi is not None else None
        bound_min, s_min = _interval_min(s_lo, s_hi, params)
        if i * math.log(2.0) > log_t + bound_min + 1e-12:
            return False, _y_of_s(s_min)
    return True, None


def in_E_T_star(f: FactoredInteger, params: EtParams) -> bool:
    """E_T membership plus the exact normalized second-moment cap."""
    ok, _ = in_E_T(f, params)
    if not ok:
        return False
    return moment(f, 2) <= params.T * f.tau * (1.0 + 1e-12)


def in_E_q_T(f: FactoredInteger, q: int, params: EtParams) -> bool:
    """E_T* membership plus M_j <= tau * theta_j for all 1 <= j <= q."""
    if q <= 1:
        return in_E_T_star(f, params)
    thetas = [params.theta(j) for j in range(1, q + 1)]
    if not in_E_T_star(f, params):
        return False
    mv = moment_vector(f, q)
    return all(mv.values[j] <= f.tau * thetas[j - 1] * (1.0 + 1e-12)
               for j in range(1, q + 1))


def membership_report(f: FactoredInteger, params: EtParams,
                      q_max: int = 4) -> MembershipReport:
    in_e = f.mu != 0
    in_et, witness = in_E_T(f, params)
    in_star = in_E_T_star(f, params) if in_et else False
    flags = tuple(in_E_q_T(f, q, params) if in_star else False
                  for q in range(1, q_max + 1))
    return MembershipReport(n=f.value, in_E=in_e, in_ET=in_et,
                            in_ETstar=in_star, in_EqT=flags,
                            witness_y=witness)
