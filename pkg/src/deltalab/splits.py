"""Inequalities tying the window maximum to the smooth/rough split.

For squarefree n = a*b with a the sub-y part, the pigeonhole bound
Delta(n) >= tau(a) * Delta_v(b) / (1 + 2v) holds exactly whenever
v >= log a and is asserted; the Fourier-side variant carries an
unspecified constant and is only measured.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass

from .arith import FactoredInteger, smooth_part
from .delta import delta_max, delta_profile
from .fourier import d_y, tau_sq_integral


@dataclass(frozen=True)
class SplitReport:
    n: int
    a: int
    b: int
    y: float
    v: float
    tau_a: int
    delta_v_b: int
    lhs: int            # Delta(n)
    rhs_33: float | None
    ratio_32: float
    applicable: bool
    ok_33: bool | None


def check_pigeonhole(f: FactoredInteger, y: float, v: float,
                     tol: float = 1e-9) -> SplitReport:
    """Evaluate both sides of the pigeonhole bound on the split at y.

    When v < log a the bound does not apply and the report says so
    instead of failing.
    """
    if f.mu == 0:
        raise ValueError("n must be squarefree")
    if f.pplus < y:
        raise ValueError("n must have a prime factor >= y")
    a, b = smooth_part(f, y)
    lhs = delta_max(delta_profile(f))
    dvb = delta_max(delta_profile(b), window=v)
    ratio_32 = lhs * math.log(a.value * y) / (a.tau * d_y(b, y).value)
    applicable = v >= math.log(a.value) - 1e-12
    if not applicable:
        return SplitReport(n=f.value, a=a.value, b=b.value, y=y, v=v,
                           tau_a=a.tau, delta_v_b=dvb, lhs=lhs, rhs_33=None,
                           ratio_32=ratio_32, applicable=False, ok_33=None)
    rhs = a.tau * dvb / (1.0 + 2.0 * v)
    ok = lhs >= rhs - tol * max(1.0, abs(rhs))
    return SplitReport(n=f.value, a=a.value, b=b.value, y=y, v=v,
                       tau_a=a.tau, delta_v_b=dvb, lhs=lhs, rhs_33=rhs,
                       ratio_32=ratio_32, applicable=True, ok_33=ok)


@dataclass(frozen=True)
class ScanSummary:
    y: float
    count: int
    min: float
    median: float
    max: float


def ratio_32_scan(members: list[FactoredInteger], y: float) -> ScanSummary:
    """Distribution of the measured Fourier-side ratio over a sample.

    No pass threshold: the bound's constant is unspecified, so only the
    observed minimum matters downstream.
    """
    ratios = []
    for f in members:
        if f.mu == 0 or f.pplus < y:
            raise ValueError("members must be squarefree with a prime >= y")
        a, b = smooth_part(f, y)
        lhs = delta_max(delta_profile(f))
        ratios.append(lhs * math.log(a.value * y) / (a.tau * d_y(b, y).value))
    return ScanSummary(y=y, count=len(ratios), min=min(ratios),
                       median=statistics.median(ratios), max=max(ratios))


@dataclass(frozen=True)
class MwReport:
    n: int
    nu: int
    y: float
    lhs: float
    rhs: float
    ok: bool


def montgomery_wirsing_check(b: FactoredInteger, nu: int, y: float,
                             tol: float = 1e-9) -> MwReport:
    """Short-range energy against 1/(3 nu) of the reference range."""
    if nu < 1:
        raise ValueError("nu must be positive")
    log_y = math.log(y)
    lhs = tau_sq_integral(b, 1.0 / (nu * log_y))
    rhs = tau_sq_integral(b, 1.0 / log_y) / (3.0 * nu)
    ok = lhs >= rhs * (1.0 - tol)
    return MwReport(n=b.value, nu=nu, y=y, lhs=lhs, rhs=rhs, ok=ok)
