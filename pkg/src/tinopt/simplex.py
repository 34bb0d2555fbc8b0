"""Exact rational simplex in dictionary form with Bland's least-index rule.

Solves ``max c.x  s.t.  A x <= b,  x >= 0`` over ``fractions.Fraction``.
A negative entry in ``b`` triggers the usual auxiliary-variable phase one.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Sequence

from .errors import InfeasibleError, TinOptError

ZERO = Fraction(0)


class UnboundedError(TinOptError):
    """The objective can be increased without limit."""


class _Dictionary:
    # Row r reads: x[basic[r]] = rhs[r] - sum_j T[r][j] * x[nonbasic[j]]
    # Objective:   z = z0 + sum_j obj[j] * x[nonbasic[j]]

    def __init__(self, A, b, n_vars):
        self.m = len(A)
        self.T = [list(row) for row in A]
        self.rhs = list(b)
        self.basic = list(range(n_vars, n_vars + self.m))
        self.nonbasic = list(range(n_vars))
        self.obj = [ZERO] * n_vars
        self.z0 = ZERO
        self.pivots = 0

    def pivot(self, r, j):
        T, rhs = self.T, self.rhs
        row = T[r]
        p = row[j]
        inv = 1 / p
        new_row = [v * inv for v in row]
        new_row[j] = inv
        new_rhs = rhs[r] * inv
        T[r] = new_row
        rhs[r] = new_rhs
        for s in range(self.m):
            if s == r:
                continue
            other = T[s]
            f = other[j]
            if not f:
                continue
            for k, v in enumerate(new_row):
                if v:
                    other[k] -= f * v
            other[j] = -f * inv
            rhs[s] -= f * new_rhs
        f = self.obj[j]
        if f:
            obj = self.obj
            for k, v in enumerate(new_row):
                if v:
                    obj[k] -= f * v
            obj[j] = -f * inv
            self.z0 += f * new_rhs
        self.basic[r], self.nonbasic[j] = self.nonbasic[j], self.basic[r]
        self.pivots += 1

    def entering(self):
        best = None
        for j, c in enumerate(self.obj):
            if c > 0 and (best is None or self.nonbasic[j] < self.nonbasic[best]):
                best = j
        return best

    def leaving(self, j):
        best = None
        best_ratio = None
        for r in range(self.m):
            a = self.T[r][j]
            if a > 0:
                ratio = self.rhs[r] / a
                if (
                    best is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and self.basic[r] < self.basic[best])
                ):
                    best, best_ratio = r, ratio
        return best

    def run(self):
        while True:
            j = self.entering()
            if j is None:
                return
            r = self.leaving(j)
            if r is None:
                raise UnboundedError("objective is unbounded above")
            self.pivot(r, j)

    def value_of(self, var):
        try:
            return self.rhs[self.basic.index(var)]
        except ValueError:
            return ZERO

    def set_objective(self, c):
        # Express sum_k c[k] x[k] in terms of the current nonbasic variables.
        self.z0 = ZERO
        self.obj = [ZERO] * len(self.nonbasic)
        col = {v: j for j, v in enumerate(self.nonbasic)}
        for k, ck in enumerate(c):
            if not ck:
                continue
            if k in col:
                self.obj[col[k]] += ck
            else:
                r = self.basic.index(k)
                self.z0 += ck * self.rhs[r]
                for j, v in enumerate(self.T[r]):
                    if v:
                        self.obj[j] -= ck * v


def _phase_one(d: _Dictionary, n_vars: int):
    aux = n_vars + d.m
    for row in d.T:
        row.append(Fraction(-1))
    d.nonbasic.append(aux)
    d.obj = [ZERO] * (len(d.nonbasic) - 1) + [Fraction(-1)]
    d.z0 = ZERO
    j = len(d.nonbasic) - 1
    r = min(range(d.m), key=lambda s: (d.rhs[s], d.basic[s]))
    d.pivot(r, j)
    d.run()
    if d.z0 < 0:
        raise InfeasibleError("constraint system has no nonnegative solution")
    if aux in d.basic:
        r = d.basic.index(aux)
        cols = [j for j, v in enumerate(d.T[r]) if v]
        j = min(cols, key=lambda c: d.nonbasic[c])
        d.pivot(r, j)
    j = d.nonbasic.index(aux)
    for row in d.T:
        del row[j]
    del d.nonbasic[j]


class LpSolution:
    __slots__ = ("value", "x", "pivots")

    def __init__(self, value, x, pivots):
        self.value = value
        self.x = x
        self.pivots = pivots

    def __repr__(self):
        return f"LpSolution(value={self.value}, x={self.x})"


def maximize(c: Sequence, A: Sequence[Sequence], b: Sequence) -> LpSolution:
    """Exact optimum of ``max c.x`` over ``A x <= b, x >= 0``."""
    n = len(c)
    c = [Fraction(v) for v in c]
    A = [[Fraction(v) for v in row] for row in A]
    b = [Fraction(v) for v in b]
    if any(len(row) != n for row in A) or len(A) != len(b):
        raise ValueError("inconsistent LP dimensions")
    d = _Dictionary(A, b, n)
    if d.m and min(b) < 0:
        _phase_one(d, n)
    d.set_objective(c)
    d.run()
    x: List[Fraction] = [d.value_of(k) for k in range(n)]
    return LpSolution(d.z0, x, d.pivots)


def is_feasible(A, b, n_vars) -> bool:
    try:
        maximize([0] * n_vars, A, b)
    except InfeasibleError:
        return False
    return True
