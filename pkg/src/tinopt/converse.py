"""Finite-SNR outer bounds and the constant-gap certificate."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InfeasibleError, InvalidInstanceError
from .model import check_tin_condition, ensure_strengths
from .region import DirectedCycle, RegionConstraint, enumerate_cycles, lp_max_sum
from .tin import achievable_sum

LN2 = math.log(2.0)
RATIONAL_SCALE = 2**40
GAP_TOLERANCE = 1e-6
X_CHANNEL_NOTE = (
    "bounds hold for the per-receiver sum over all X-channel messages, "
    "so the certificate covers both message sets"
)


def _check_power(P):
    if not P > 1:
        raise InvalidInstanceError(f"P must exceed 1, got {P}")


def _log2_1p_sum(exponents_ln):
    """log2(1 + sum(exp(e))) for natural-log exponents."""
    return float(np.logaddexp.reduce(np.array([0.0] + list(exponents_ln))) / LN2)


def mac_bound(alpha, receiver, P) -> float:
    """log2(1 + sum_j P**alpha[i][j]) for receiver i."""
    _check_power(P)
    alpha = ensure_strengths(alpha)
    lnP = math.log(P)
    return _log2_1p_sum(float(a) * lnP for a in alpha.alpha[receiver])


def genie_cycle_bound(alpha, cycle, P) -> float:
    """Gaussian-maximized genie-aided sum-rate bound along a directed cycle.

    Receiver u with cycle predecessor v contributes
    log2(1 + sum_{k != u} P**a[u][k] + P**a[u][u] / (1 + P**a[v][u])).
    """
    _check_power(P)
    alpha = ensure_strengths(alpha)
    cycle = cycle if isinstance(cycle, DirectedCycle) else DirectedCycle(tuple(cycle))
    a = alpha.to_floats()
    K = alpha.n_transmitters
    lnP = math.log(P)
    total = 0.0
    for prev, u in cycle.edges():
        terms = [a[u][k] * lnP for k in range(K) if k != u]
        terms.append(a[u][u] * lnP - float(np.logaddexp(0.0, a[prev][u] * lnP)))
        total += _log2_1p_sum(terms)
    return total


def simplified_cycle_bound(alpha, cycle, P, K=None) -> float:
    """sum over the cycle of (a[u][u] - a[v][u]) log2 P + log2(K + 1)."""
    _check_power(P)
    alpha = ensure_strengths(alpha)
    cycle = cycle if isinstance(cycle, DirectedCycle) else DirectedCycle(tuple(cycle))
    K = alpha.n_receivers if K is None else K
    a = alpha.alpha
    log2P = math.log2(P)
    return math.fsum(
        float(a[u][u] - a[prev][u]) * log2P + math.log2(K + 1) for prev, u in cycle.edges()
    )


def _rationalize(x: float) -> Fraction:
    return Fraction(round(x * RATIONAL_SCALE), RATIONAL_SCALE)


def outer_constraints(alpha, P):
    """Finite-SNR sum-rate constraints (bits) on the per-receiver aggregate rates."""
    _check_power(P)
    alpha = ensure_strengths(alpha)
    alpha._require_square()
    K = alpha.n_receivers
    cons = [
        RegionConstraint("individual", (i,), _rationalize(mac_bound(alpha, i, P)))
        for i in range(K)
    ]
    for cyc in enumerate_cycles(K):
        bound = min(genie_cycle_bound(alpha, cyc, P), simplified_cycle_bound(alpha, cyc, P, K))
        cons.append(RegionConstraint("cycle", cyc.users, _rationalize(bound)))
    return cons


def outer_sum(alpha, P) -> float:
    alpha = ensure_strengths(alpha)
    return float(lp_max_sum(outer_constraints(alpha, P), alpha.n_receivers).value)


def constant_gap_bound(K: int) -> float:
    return K * math.log2(K * (K + 1))


@dataclass(frozen=True)
class GapCertificate:
    P: float
    achievable_sum: float
    outer_sum: float
    gap: float
    gap_bound: float
    passed: bool
    applicable: bool = True
    note: str = X_CHANNEL_NOTE

    def to_json(self):
        return {
            "P": self.P,
            "achievable": self.achievable_sum,
            "outer": self.outer_sum,
            "gap": self.gap,
            "bound": self.gap_bound,
            "pass": self.passed,
            "applicable": self.applicable,
        }


def gap_certificate(alpha, P) -> GapCertificate:
    """Compare the TIN achievable sum rate with the outer bound at one P.

    When the TIN condition fails the numbers are still reported but the
    certificate is marked not applicable and does not pass.
    """
    _check_power(P)
    alpha = ensure_strengths(alpha)
    applicable = check_tin_condition(alpha).holds
    try:
        ach = achievable_sum(alpha, P).sum
    except InfeasibleError:
        if applicable:
            raise
        # negative cycle right-hand sides: power control has no target at all
        ach = math.nan
    try:
        out = outer_sum(alpha, P)
    except InfeasibleError:
        if applicable:
            raise
        out = math.nan
    gap = out - ach
    bound = constant_gap_bound(alpha.n_receivers)
    passed = applicable and not math.isnan(gap) and gap <= bound + GAP_TOLERANCE
    return GapCertificate(float(P), ach, out, gap, bound, passed, applicable)
