"""Channel instances, strength normalization and TIN-optimality conditions."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import InvalidInstanceError, ShapeError

DEFAULT_MAX_DENOMINATOR = 10**6


def as_fraction(value) -> Fraction:
    """Exact rational from an int, Fraction, decimal string or float.

    Floats go through their shortest decimal repr so that ``0.4`` becomes
    ``2/5`` rather than the binary64 neighbour.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not strengths")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InvalidInstanceError(f"non-finite value {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


@dataclass(frozen=True)
class StrengthMatrix:
    """Strength exponents alpha[k][i] of the link from transmitter i to receiver k."""

    alpha: tuple

    def __init__(self, alpha: Iterable[Iterable]):
        rows = tuple(tuple(as_fraction(a) for a in row) for row in alpha)
        if not rows or not rows[0]:
            raise ShapeError("strength matrix must have at least one row and column")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ShapeError("ragged strength matrix")
        for row in rows:
            for a in row:
                if a < 0:
                    raise InvalidInstanceError(f"negative strength {a}")
        object.__setattr__(self, "alpha", rows)

    @property
    def n_receivers(self) -> int:
        return len(self.alpha)

    @property
    def n_transmitters(self) -> int:
        return len(self.alpha[0])

    @property
    def is_square(self) -> bool:
        return self.n_receivers == self.n_transmitters

    def __getitem__(self, ki):
        k, i = ki
        return self.alpha[k][i]

    def __len__(self):
        return self.n_receivers

    def diagonal(self):
        return [self.alpha[i][i] for i in range(min(self.n_receivers, self.n_transmitters))]

    def scaled(self, factor) -> "StrengthMatrix":
        factor = as_fraction(factor)
        return StrengthMatrix([[a * factor for a in row] for row in self.alpha])

    def permuted(self, perm: Sequence[int]) -> "StrengthMatrix":
        """Relabel users: entry (a, b) of the result is alpha[perm[a]][perm[b]]."""
        self._require_square()
        return StrengthMatrix([[self.alpha[pa][pb] for pb in perm] for pa in perm])

    def to_floats(self):
        return [[float(a) for a in row] for row in self.alpha]

    def to_strings(self):
        return [[fraction_str(a) for a in row] for row in self.alpha]

    def _require_square(self):
        if not self.is_square:
            raise ShapeError(
                f"expected a square matrix, got {self.n_receivers}x{self.n_transmitters}"
            )


def fraction_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def ensure_strengths(alpha) -> StrengthMatrix:
    return alpha if isinstance(alpha, StrengthMatrix) else StrengthMatrix(alpha)


@dataclass(frozen=True)
class GaussianSpec:
    """Normalized Gaussian channel: strengths, nominal power P and link phases.

    Phases are carried along for completeness; no bound depends on them.
    """

    strengths: StrengthMatrix
    P: float
    phases: Optional[tuple] = None

    def __post_init__(self):
        if not self.P > 1:
            raise InvalidInstanceError(f"nominal power must exceed 1, got {self.P}")
        if self.phases is not None:
            phases = tuple(tuple(float(t) for t in row) for row in self.phases)
            if len(phases) != self.strengths.n_receivers or any(
                len(r) != self.strengths.n_transmitters for r in phases
            ):
                raise ShapeError("phase matrix must match the strength matrix")
            object.__setattr__(self, "phases", phases)


def normalize_strengths(
    raw_gains, tx_powers, nominal_power, max_denominator=DEFAULT_MAX_DENOMINATOR
) -> StrengthMatrix:
    """alpha_ki = log(max(1, |h_ki|^2 P_i)) / log P, rounded to a nearby rational."""
    if not nominal_power > 1:
        raise InvalidInstanceError(f"nominal power must exceed 1, got {nominal_power}")
    rows = [list(r) for r in raw_gains]
    powers = list(tx_powers)
    if not rows or any(len(r) != len(powers) for r in rows):
        raise ShapeError("raw gain columns must match the number of transmit powers")
    if any(not p > 0 for p in powers):
        raise InvalidInstanceError("transmit powers must be positive")
    log_p = math.log(nominal_power)
    alpha = []
    for row in rows:
        out = []
        for h, p in zip(row, powers):
            snr = abs(complex(h)) ** 2 * p
            level = math.log(snr) / log_p if snr > 1 else 0.0
            out.append(Fraction(level).limit_denominator(max_denominator))
        alpha.append(out)
    return StrengthMatrix(alpha)


@dataclass(frozen=True)
class Violation:
    user: int
    lhs: Fraction
    rhs: Fraction


@dataclass(frozen=True)
class TinConditionReport:
    violations: tuple = ()

    @property
    def holds(self) -> bool:
        return not self.violations


def _max_or_zero(values):
    return max(values, default=Fraction(0))


def check_tin_condition(alpha) -> TinConditionReport:
    """Desired strength must cover the strongest interference caused plus suffered."""
    alpha = ensure_strengths(alpha)
    alpha._require_square()
    a = alpha.alpha
    K = alpha.n_receivers
    violations = []
    for i in range(K):
        caused = _max_or_zero(a[j][i] for j in range(K) if j != i)
        suffered = _max_or_zero(a[i][k] for k in range(K) if k != i)
        rhs = caused + suffered
        if a[i][i] < rhs:
            violations.append(Violation(i, a[i][i], rhs))
    return TinConditionReport(tuple(violations))


@dataclass(frozen=True)
class Matching:
    """kappa (receiver, transmitter) pairs, sorted by receiver index."""

    pairs: tuple

    def __post_init__(self):
        pairs = tuple(sorted((int(r), int(t)) for r, t in self.pairs))
        rx = [r for r, _ in pairs]
        tx = [t for _, t in pairs]
        if len(set(rx)) != len(rx) or len(set(tx)) != len(tx):
            raise ShapeError(f"matching reuses an index: {pairs}")
        object.__setattr__(self, "pairs", pairs)

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


def pair_is_tin_optimal(alpha: StrengthMatrix, r: int, t: int) -> bool:
    a = alpha.alpha
    caused = _max_or_zero(a[k][t] for k in range(alpha.n_receivers) if k != r)
    suffered = _max_or_zero(a[r][j] for j in range(alpha.n_transmitters) if j != t)
    return a[r][t] >= caused + suffered


def _candidate_matchings(n_rx, n_tx):
    kappa = min(n_rx, n_tx)
    for receivers in itertools.combinations(range(n_rx), kappa):
        for transmitters in itertools.permutations(range(n_tx), kappa):
            yield tuple(zip(receivers, transmitters))


def find_tin_matching(alpha) -> Optional[Matching]:
    """Lexicographically smallest matching meeting the generalized TIN condition.

    Every pair is judged against all other rows and columns, matched or not,
    so the verdict is a property of the pairs alone.
    """
    alpha = ensure_strengths(alpha)
    ok = {}
    best = None
    for pairs in _candidate_matchings(alpha.n_receivers, alpha.n_transmitters):
        good = True
        for rt in pairs:
            if rt not in ok:
                ok[rt] = pair_is_tin_optimal(alpha, *rt)
            if not ok[rt]:
                good = False
                break
        if good and (best is None or pairs < best):
            best = pairs
    return None if best is None else Matching(best)


def reduce_to_ic(alpha, matching: Matching) -> StrengthMatrix:
    """kappa-user interference channel formed by the matched links."""
    alpha = ensure_strengths(alpha)
    for r, t in matching:
        if not (0 <= r < alpha.n_receivers and 0 <= t < alpha.n_transmitters):
            raise ShapeError(f"matching pair ({r}, {t}) out of range")
    pairs = matching.pairs
    return StrengthMatrix([[alpha.alpha[ra][tb] for _, tb in pairs] for ra, _ in pairs])


def random_tin_alpha(K, rng=None, denominator=10, cross_max=1, slack_max=1) -> StrengthMatrix:
    """Random K-user instance on a 1/denominator grid that satisfies the TIN condition."""
    rng = rng or random.Random()
    top = int(cross_max * denominator)
    a = [[Fraction(rng.randint(0, top), denominator) for _ in range(K)] for _ in range(K)]
    for i in range(K):
        caused = _max_or_zero(a[j][i] for j in range(K) if j != i)
        suffered = _max_or_zero(a[i][k] for k in range(K) if k != i)
        a[i][i] = caused + suffered + Fraction(rng.randint(0, int(slack_max * denominator)), denominator)
    return StrengthMatrix(a)


def random_alpha(n_rx, n_tx, rng=None, denominator=10, high=2) -> StrengthMatrix:
    rng = rng or random.Random()
    top = int(high * denominator)
    return StrengthMatrix(
        [[Fraction(rng.randint(0, top), denominator) for _ in range(n_tx)] for _ in range(n_rx)]
    )
