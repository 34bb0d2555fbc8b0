"""Achievability: power control for a GDoF target and finite-SNR TIN rates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from . import simplex
from .errors import ConsistencyError, InfeasibleError, InvalidInstanceError, ShapeError
from .model import as_fraction, ensure_strengths
from .region import build_region, lp_max_sum

LN2 = math.log(2.0)


@dataclass(frozen=True)
class PowerExponents:
    """Transmitter i sends at power P**r[i]; every r[i] <= 0."""

    r: Tuple[Fraction, ...]

    def __post_init__(self):
        r = tuple(as_fraction(v) for v in self.r)
        if any(v > 0 for v in r):
            raise InvalidInstanceError(f"power exponents must be <= 0, got {r}")
        object.__setattr__(self, "r", r)

    def __len__(self):
        return len(self.r)

    def __iter__(self):
        return iter(self.r)


@dataclass(frozen=True)
class PowerControlInfeasible:
    """No r <= 0 delivers the target; ``conflict`` is an irreducible subset of constraints."""

    d: Tuple[Fraction, ...]
    conflict: Tuple[str, ...]

    def __bool__(self):
        return False


def _power_constraints(alpha, d):
    # u = -r >= 0.  d_i <= a_ii - u_i  and  d_i <= a_ii - u_i - a_ij + u_j.
    a = alpha.alpha
    K = len(d)
    rows, rhs, labels = [], [], []
    for i in range(K):
        row = [0] * K
        row[i] = 1
        rows.append(row)
        rhs.append(a[i][i] - d[i])
        labels.append(f"d{i + 1} <= a{i + 1}{i + 1} + r{i + 1}")
    for i in range(K):
        for j in range(K):
            if i == j:
                continue
            row = [0] * K
            row[i] = 1
            row[j] = -1
            rows.append(row)
            rhs.append(a[i][i] - a[i][j] - d[i])
            labels.append(f"d{i + 1} <= (a{i + 1}{i + 1} + r{i + 1}) - (a{i + 1}{j + 1} + r{j + 1})")
    return rows, rhs, labels


def _irreducible_subset(rows, rhs, K):
    # Deletion filter: drop every constraint whose removal keeps the system infeasible.
    keep = list(range(len(rows)))
    for idx in list(keep):
        trial = [k for k in keep if k != idx]
        if not simplex.is_feasible([rows[k] for k in trial], [rhs[k] for k in trial], K):
            keep = trial
    return keep


def power_control_feasible(alpha, d):
    """Smallest-power exponents r <= 0 under which TIN delivers the GDoF tuple d.

    Feasible exponents are closed under componentwise minimum, so the
    returned r is the unique componentwise-smallest one (the largest power
    cut). Returns a falsy ``PowerControlInfeasible`` when no r exists.
    """
    alpha = ensure_strengths(alpha)
    alpha._require_square()
    d = tuple(as_fraction(v) for v in d)
    K = alpha.n_receivers
    if len(d) != K:
        raise ShapeError(f"GDoF tuple has {len(d)} entries, channel has {K} users")
    if any(v < 0 for v in d):
        raise InvalidInstanceError("GDoF tuple must be nonnegative")
    rows, rhs, labels = _power_constraints(alpha, d)
    try:
        sol = simplex.maximize([1] * K, rows, rhs)
    except InfeasibleError:
        keep = _irreducible_subset(rows, rhs, K)
        return PowerControlInfeasible(d, tuple(labels[k] for k in keep))
    return PowerExponents(tuple(-u for u in sol.x))


def delivered_gdof(alpha, r) -> Tuple[Fraction, ...]:
    """GDoF each user gets from TIN under exponents r (may be negative if infeasible)."""
    alpha = ensure_strengths(alpha)
    a = alpha.alpha
    r = list(r)
    K = len(r)
    out = []
    for i in range(K):
        interference = max([Fraction(0)] + [a[i][j] + r[j] for j in range(K) if j != i])
        out.append(a[i][i] + r[i] - interference)
    return tuple(out)


@dataclass(frozen=True)
class RateReport:
    per_user: Tuple[float, ...]
    sum: float
    P: float
    exponents: PowerExponents
    gdof: Optional[Tuple[Fraction, ...]] = None
    tin_optimal: bool = True


def _check_power(P):
    if not P > 1:
        raise InvalidInstanceError(f"P must exceed 1, got {P}")


def tin_rates(alpha, r, P) -> RateReport:
    """Per-user TIN rates in bits, accumulated in the log domain."""
    _check_power(P)
    alpha = ensure_strengths(alpha)
    alpha._require_square()
    if not isinstance(r, PowerExponents):
        r = PowerExponents(tuple(r))
    K = alpha.n_receivers
    if len(r) != K:
        raise ShapeError("one power exponent per user is required")
    a = np.array(alpha.to_floats())
    rv = np.array([float(v) for v in r.r])
    lnP = math.log(P)
    rates = []
    for i in range(K):
        signal = (a[i, i] + rv[i]) * lnP
        others = [(a[i, j] + rv[j]) * lnP for j in range(K) if j != i]
        noise = np.logaddexp.reduce(np.array([0.0] + others))
        rates.append(float(np.logaddexp(0.0, signal - noise) / LN2))
    return RateReport(tuple(rates), math.fsum(rates), float(P), r)


def achievable_sum(alpha, P) -> RateReport:
    """TIN rates at the canonical sum-GDoF optimum, with the finite-SNR floor asserted."""
    _check_power(P)
    alpha = ensure_strengths(alpha)
    region = build_region(alpha)
    opt = lp_max_sum(region)
    r = power_control_feasible(alpha, opt.argmax)
    if not r:
        raise ConsistencyError(f"LP optimum {opt.argmax} is not reachable by power control: {r}")
    rep = tin_rates(alpha, r, P)
    K = alpha.n_receivers
    floor = float(opt.value) * math.log2(P) - K * math.log2(K)
    if rep.sum < floor - 1e-9 * max(1.0, abs(floor)):
        raise ConsistencyError(f"TIN sum rate {rep.sum} below the guaranteed floor {floor}")
    return RateReport(rep.per_user, rep.sum, rep.P, r, opt.argmax, region.exact)


def gdof_slope(alpha, P1, P2) -> float:
    """Finite-difference estimate of d(sum rate)/d(log2 P)."""
    if not (1 < P1 < P2):
        raise InvalidInstanceError(f"need 1 < P1 < P2, got P1={P1}, P2={P2}")
    s1 = achievable_sum(alpha, P1).sum
    s2 = achievable_sum(alpha, P2).sum
    return (s2 - s1) / (math.log2(P2) - math.log2(P1))
