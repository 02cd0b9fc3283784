"""Divisor Dirichlet polynomials and their normalized Fourier energy.

The normalized square |tau(n, theta)|^2 / tau(n) factors over prime
powers into short cosine sums, so its integrals admit an exact sinc-form
expansion whenever the term count is affordable; an adaptive
Gauss-Kronrod integration covers the rest and doubles as the
independent cross-check in the tests.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .arith import FactoredInteger, ResourceLimitError, _simple_prime_array
from .moments import moment

EXPANSION_TERM_BUDGET = 2_000_000
COSINE_SUM_PRIME_BUDGET = 10**8


class QuadratureError(Exception):
    """Adaptive integration failed to reach tolerance; carries the
    partial result."""

    def __init__(self, message: str, partial: "QuadratureResult"):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class DirichletEval:
    n: int
    theta: float
    value: complex
    norm_sq_over_tau: float


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int
    method: str


def tau_theta(f: FactoredInteger, theta: float) -> DirichletEval:
    """Sum of d^{i theta} over d | n, via the prime-power product."""
    value = complex(1.0, 0.0)
    for p, a in f.factors:
        lp = math.log(p)
        value *= sum(cmath.exp(1j * theta * j * lp) for j in range(a + 1))
    return DirichletEval(n=f.value, theta=theta, value=value,
                         norm_sq_over_tau=abs(value) ** 2 / f.tau)


def _cosine_expansion(f: FactoredInteger, scale: float,
                      max_terms: int = EXPANSION_TERM_BUDGET):
    """|tau(n, scale*t)|^2 / tau(n) as sum w * cos(freq * t).

    Signed frequencies come in symmetric pairs, so the complex
    exponential sum is real term by term.
    """
    n_terms = 1
    for _, a in f.factors:
        n_terms *= 2 * a + 1
    if n_terms > max_terms:
        raise ResourceLimitError(
            f"cosine expansion needs {n_terms} terms, budget {max_terms}")
    freqs = np.zeros(1)
    weights = np.ones(1)
    for p, a in f.factors:
        lp = math.log(p) * scale
        ms = np.arange(-a, a + 1)
        coef = (a + 1 - np.abs(ms)) / (a + 1)
        freqs = (freqs[:, None] + ms[None, :] * lp).ravel()
        weights = (weights[:, None] * coef[None, :]).ravel()
    return weights, freqs


def _expansion_integral(weights: np.ndarray, freqs: np.ndarray, c: float) -> float:
    """Integral over [0, c] of sum w cos(freq * t)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(freqs == 0.0, c, np.sin(freqs * c) / freqs)
    return float(np.dot(weights, terms))


def _energy_eval(f: FactoredInteger, scale: float, t: float) -> float:
    """Direct evaluation of |tau(n, scale*t)|^2 / tau(n)."""
    out = 1.0
    for p, a in f.factors:
        lp = math.log(p) * scale
        s = 1.0
        for m in range(1, a + 1):
            s += 2.0 * (1.0 - m / (a + 1.0)) * math.cos(m * lp * t)
        out *= s
    return out


def _energy_integral(f: FactoredInteger, scale: float, c: float,
                     tol: float = 1e-8,
                     max_terms: int = EXPANSION_TERM_BUDGET) -> QuadratureResult:
    n_terms = 1
    for _, a in f.factors:
        n_terms *= 2 * a + 1
    if n_terms <= max_terms:
        w, fr = _cosine_expansion(f, scale, max_terms)
        return QuadratureResult(value=_expansion_integral(w, fr, c),
                                abs_error_estimate=0.0,
                                evaluations=len(w), method="exact-expansion")
    cycles = sum(a * math.log(p) for p, a in f.factors) * scale * c / (2 * math.pi)
    limit = max(200, int(4 * cycles) + 50)
    out = integrate.quad(lambda t: _energy_eval(f, scale, t), 0.0, c,
                         epsabs=tol, epsrel=0.0, limit=limit, full_output=1)
    value, abserr, info = out[0], out[1], out[2]
    result = QuadratureResult(value=value, abs_error_estimate=abserr,
                              evaluations=int(info["neval"]), method="adaptive")
    if len(out) > 3 or abserr > 10 * tol:
        raise QuadratureError(
            f"adaptive quadrature stalled at error {abserr:.3e}", result)
    return result


def d_y(b: FactoredInteger, y: float, tol: float = 1e-8,
        max_terms: int = EXPANSION_TERM_BUDGET) -> QuadratureResult:
    """Integral over [0, 1] of |tau(b, t / log y)|^2 / tau(b)."""
    if y < 2:
        raise ValueError("y must be at least 2")
    if b.factors and b.factors[0][0] < y:
        warnings.warn(f"n={b.value} has prime factors below y={y}",
                      stacklevel=2)
    return _energy_integral(b, 1.0 / math.log(y), 1.0, tol=tol,
                            max_terms=max_terms)


def tau_sq_integral(b: FactoredInteger, c: float,
                    tol: float = 1e-8) -> float:
    """Integral over [0, c] of |tau(b, t)|^2."""
    return b.tau * _energy_integral(b, 1.0, c, tol=tol).value


@dataclass(frozen=True)
class ParsevalReport:
    n: int
    lhs: float
    rhs: float
    ratio: float


def parseval_ratio(f: FactoredInteger) -> ParsevalReport:
    """Monitor M_2(n)/tau(n) against the unit-interval energy integral.

    No constant is asserted here; callers record the observed ratio.
    """
    lhs = moment(f, 2) / f.tau
    rhs = _energy_integral(f, 1.0, 1.0).value
    return ParsevalReport(n=f.value, lhs=lhs, rhs=rhs, ratio=lhs / rhs)


@dataclass(frozen=True)
class CosineSumReport:
    psi: float
    y: float
    total: float
    model: float
    deviation: float


def cosine_sum_check(psi: float, y: float,
                     prime_budget: int = COSINE_SUM_PRIME_BUDGET) -> CosineSumReport:
    """Sum of cos(psi log p)/p over p <= y against its log model."""
    if not 0.0 <= psi <= 1.0:
        raise ValueError("psi must lie in [0, 1]")
    if y < 2 or y > prime_budget:
        raise ResourceLimitError(f"y={y} outside prime budget {prime_budget}")
    primes = _simple_prime_array(int(y))
    logs = np.log(primes.astype(np.float64))
    total = float(np.sum(np.cos(psi * logs) / primes))
    log_y = math.log(y)
    model = math.log(log_y / (1.0 + psi * log_y))
    return CosineSumReport(psi=psi, y=y, total=total, model=model,
                           deviation=total - model)
