"""GDoF polytope of a TIN-optimal interference channel and its sum-GDoF LP."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from . import simplex
from .errors import ResourceLimitError, ShapeError
from .model import StrengthMatrix, as_fraction, check_tin_condition, ensure_strengths, fraction_str

DEFAULT_CYCLE_CAP = 8
ORACLE_CAP = 4


@dataclass(frozen=True, order=True)
class DirectedCycle:
    """Directed cycle of distinct users, rotated so the smallest index leads."""

    users: Tuple[int, ...]

    def __post_init__(self):
        users = tuple(int(u) for u in self.users)
        if len(users) < 2 or len(set(users)) != len(users):
            raise ValueError(f"cycle needs >= 2 distinct users, got {users}")
        k = users.index(min(users))
        object.__setattr__(self, "users", users[k:] + users[:k])

    def __len__(self):
        return len(self.users)

    def __iter__(self):
        return iter(self.users)

    def edges(self):
        """(predecessor, user) pairs with the predecessor of the first user being the last."""
        u = self.users
        return [(u[j - 1], u[j]) for j in range(len(u))]


def cycle_count(K: int) -> int:
    return sum(math.comb(K, m) * math.factorial(m - 1) for m in range(2, K + 1))


def enumerate_cycles(K: int, cap: int = DEFAULT_CYCLE_CAP):
    """Every directed cycle on every subset of 2..K users, each orientation once."""
    if K < 1:
        raise ValueError("K must be positive")
    if K > cap:
        raise ResourceLimitError("K", K, cap)
    return list(_cycles(K))


@lru_cache(maxsize=None)
def _cycles(K):
    out = []
    for m in range(2, K + 1):
        for subset in itertools.combinations(range(K), m):
            head = subset[0]
            for tail in itertools.permutations(subset[1:]):
                out.append(DirectedCycle((head,) + tail))
    return tuple(out)


@dataclass(frozen=True)
class RegionConstraint:
    """``sum(d[i] for i in users) <= rhs``; kind is "individual" or "cycle"."""

    kind: str
    users: Tuple[int, ...]
    rhs: Fraction

    @property
    def cycle(self) -> Optional[DirectedCycle]:
        return DirectedCycle(self.users) if self.kind == "cycle" else None

    def lhs(self, d):
        return sum((d[i] for i in self.users), Fraction(0))

    def to_json(self):
        return {
            "kind": self.kind,
            "users": [u + 1 for u in self.users],
            "rhs": fraction_str(self.rhs),
        }

    def describe(self):
        users = ",".join(str(u + 1) for u in self.users)
        return f"{self.kind}({users}) <= {self.rhs}"


def cycle_rhs(alpha: StrengthMatrix, cycle: DirectedCycle) -> Fraction:
    a = alpha.alpha
    return sum((a[u][u] - a[prev][u] for prev, u in cycle.edges()), Fraction(0))


@dataclass(frozen=True)
class Region:
    """Individual and cycle constraints of one instance.

    ``exact`` is False when the TIN condition fails: the polytope then only
    describes what power control with TIN delivers, not the GDoF region.
    """

    K: int
    constraints: Tuple[RegionConstraint, ...]
    exact: bool = True

    def __iter__(self):
        return iter(self.constraints)

    def __len__(self):
        return len(self.constraints)

    def __getitem__(self, i):
        return self.constraints[i]

    def to_json(self):
        return [c.to_json() for c in self.constraints]


def build_region(alpha, cap: int = DEFAULT_CYCLE_CAP) -> Region:
    alpha = ensure_strengths(alpha)
    alpha._require_square()
    K = alpha.n_receivers
    cons = [RegionConstraint("individual", (i,), alpha.alpha[i][i]) for i in range(K)]
    for cyc in enumerate_cycles(K, cap):
        cons.append(RegionConstraint("cycle", cyc.users, cycle_rhs(alpha, cyc)))
    return Region(K, tuple(cons), check_tin_condition(alpha).holds)


def _constraints_and_k(constraints, K=None):
    cons = tuple(constraints)
    if K is None:
        K = getattr(constraints, "K", None)
    if K is None:
        K = 1 + max(u for c in cons for u in c.users)
    return cons, K


def contains(constraints, d) -> Tuple[bool, Optional[RegionConstraint]]:
    """Exact membership test; returns (ok, first violated constraint or None)."""
    cons, K = _constraints_and_k(constraints, getattr(constraints, "K", None) or len(d))
    d = [as_fraction(v) for v in d]
    if len(d) != K:
        raise ShapeError(f"point has {len(d)} coordinates, region has {K} users")
    for c in cons:
        if any(u >= K for u in c.users):
            raise ShapeError(f"constraint {c.describe()} references a user beyond {K}")
    if any(v < 0 for v in d):
        return False, None
    for c in cons:
        if c.lhs(d) > c.rhs:
            return False, c
    return True, None


@dataclass(frozen=True)
class SumGdof:
    value: Fraction
    argmax: Tuple[Fraction, ...]
    exact: bool = True

    def __float__(self):
        return float(self.value)


def _rows(cons, K):
    A = []
    for c in cons:
        row = [0] * K
        for u in c.users:
            row[u] = 1
        A.append(row)
    return A


def lp_max_sum(constraints, K: Optional[int] = None) -> SumGdof:
    """Exact ``max sum(d)`` over ``d >= 0`` and the given constraints.

    The argmax is made canonical by a second LP that, among optimal points,
    maximizes the smallest coordinate; Bland's rule then fixes the vertex.
    Raises InfeasibleError when some right-hand side is negative enough to
    exclude the origin.
    """
    cons, K = _constraints_and_k(constraints, K)
    A = _rows(cons, K)
    b = [c.rhs for c in cons]
    first = simplex.maximize([1] * K, A, b)
    value = first.value
    # variables: d_1..d_K, t ; maximize t with sum(d) == value and d_i >= t
    A2 = [row + [0] for row in A]
    b2 = list(b)
    A2.append([1] * K + [0])
    b2.append(value)
    A2.append([-1] * K + [0])
    b2.append(-value)
    for i in range(K):
        row = [0] * (K + 1)
        row[i] = -1
        row[K] = 1
        A2.append(row)
        b2.append(0)
    second = simplex.maximize([0] * K + [1], A2, b2)
    d = tuple(second.x[:K])
    exact = getattr(constraints, "exact", True)
    return SumGdof(value, d, exact)


def sum_gdof(alpha, cap: int = DEFAULT_CYCLE_CAP) -> SumGdof:
    return lp_max_sum(build_region(alpha, cap))


@dataclass(frozen=True)
class XChannelCertificate:
    value: Fraction
    ic_value: Fraction
    identical_constraints: bool
    note: str = "identical constraint sets"


def x_sum_gdof(alpha, cap: int = DEFAULT_CYCLE_CAP) -> XChannelCertificate:
    """Sum-GDoF of the K x K X channel sharing alpha.

    Each IC bound extends to the X channel with d_i replaced by the total
    rate of all messages intended for receiver i; the resulting LP therefore
    has the same constraints and the same optimum.
    """
    alpha = ensure_strengths(alpha)
    ic = build_region(alpha, cap)
    x_region = Region(ic.K, tuple(_x_channel_constraints(alpha, cap)), ic.exact)
    same = x_region.constraints == ic.constraints
    ic_value = lp_max_sum(ic).value
    value = lp_max_sum(x_region).value
    note = "identical constraint sets" if same else "constraint sets differ"
    return XChannelCertificate(value, ic_value, same, note)


def _x_channel_constraints(alpha: StrengthMatrix, cap):
    # GDoF exponents of the X-channel outer bounds: the MAC bound at receiver
    # i grows like max_j alpha[i][j], each genie-aided cycle term like
    # max(0, max_{k != i} alpha[i][k], alpha[i][i] - alpha[prev][i]).
    # Under the TIN condition these collapse to the IC right-hand sides.
    a = alpha.alpha
    K = alpha.n_receivers
    for i in range(K):
        yield RegionConstraint("individual", (i,), max(a[i]))
    for cyc in enumerate_cycles(K, cap):
        rhs = Fraction(0)
        for prev, u in cyc.edges():
            others = [a[u][k] for k in range(K) if k != u]
            rhs += max([Fraction(0), a[u][u] - a[prev][u]] + others)
        yield RegionConstraint("cycle", cyc.users, rhs)


# --- independent vertex-enumeration oracle -------------------------------------------


@lru_cache(maxsize=32)
def _vertex_systems(supports: Tuple[Tuple[int, ...], ...], K: int):
    """Integer adjugates and determinants of every nonsingular K-row subsystem."""
    rows = np.array([[1 if i in s else 0 for i in range(K)] for s in supports], dtype=np.int64)
    rows = np.vstack([rows, -np.eye(K, dtype=np.int64)])
    subsets = np.array(list(itertools.combinations(range(len(rows)), K)), dtype=np.int64)
    mats = rows[subsets].astype(float)
    dets = np.rint(np.linalg.det(mats)).astype(np.int64)
    keep = dets != 0
    subsets, mats, dets = subsets[keep], mats[keep], dets[keep]
    adj = np.rint(np.linalg.inv(mats) * dets[:, None, None]).astype(np.int64)
    sign = np.sign(dets)
    return rows, subsets, adj * sign[:, None, None], dets * sign


def oracle_max_sum(constraints, K: Optional[int] = None, cap: int = ORACLE_CAP) -> Fraction:
    """Max coordinate sum over all feasible vertices, by brute-force enumeration."""
    cons, K = _constraints_and_k(constraints, K)
    if K > cap:
        raise ResourceLimitError("K", K, cap)
    supports = tuple(tuple(sorted(c.users)) for c in cons)
    rows, subsets, adj, dets = _vertex_systems(supports, K)
    rhs = [Fraction(c.rhs) for c in cons] + [Fraction(0)] * K
    scale = math.lcm(*(q.denominator for q in rhs))
    b = [int(q * scale) for q in rhs]
    bound = max(1, max(abs(v) for v in b)) * max(1, int(np.abs(adj).max(initial=1))) * K
    bound *= max(1, int(dets.max(initial=1))) * K
    dtype = np.int64 if bound < 2**62 else object
    b_arr = np.array(b, dtype=dtype)
    num = np.einsum("sij,sj->si", adj.astype(dtype), b_arr[subsets])
    lhs = num @ rows.T.astype(dtype)
    ok = np.all(lhs <= dets.astype(dtype)[:, None] * b_arr[None, :], axis=1)
    if not ok.any():
        raise simplex.InfeasibleError("polytope has no vertex")
    best = None
    for s in np.nonzero(ok)[0]:
        val = Fraction(int(num[s].sum()), int(dets[s]) * scale)
        if best is None or val > best:
            best = val
    return best


def oracle_sum_gdof(alpha, cap: int = ORACLE_CAP) -> Fraction:
    alpha = ensure_strengths(alpha)
    alpha._require_square()
    if alpha.n_receivers > cap:
        raise ResourceLimitError("K", alpha.n_receivers, cap)
    return oracle_max_sum(build_region(alpha))
