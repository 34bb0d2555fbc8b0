import random
import time
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from tinopt.errors import InfeasibleError, ResourceLimitError, ShapeError
from tinopt.model import check_tin_condition, random_tin_alpha
from tinopt.region import (
    DirectedCycle,
    RegionConstraint,
    build_region,
    contains,
    cycle_count,
    enumerate_cycles,
    oracle_max_sum,
    oracle_sum_gdof,
    sum_gdof,
    x_sum_gdof,
)

import oracles
from conftest import EXAMPLE_A, SYM3, tin_matrices


class TestCycles:
    def test_two_users(self):
        assert [c.users for c in enumerate_cycles(2)] == [(0, 1)]

    def test_three_users(self):
        got = {c.users for c in enumerate_cycles(3)}
        assert got == {(0, 1), (0, 2), (1, 2), (0, 1, 2), (0, 2, 1)}

    @pytest.mark.parametrize("K,count", [(1, 0), (2, 1), (3, 5), (4, 20), (5, 84), (8, 16064)])
    def test_counts(self, K, count):
        assert cycle_count(K) == count

    @pytest.mark.parametrize("K", [2, 3, 4, 5, 6])
    def test_enumeration_matches_oracle(self, K):
        got = [c.users for c in enumerate_cycles(K)]
        assert len(got) == len(set(got)) == cycle_count(K)
        assert set(got) == set(oracles.cycles(K))

    def test_cap(self):
        with pytest.raises(ResourceLimitError, match="cap 8"):
            enumerate_cycles(9)

    def test_rotation_is_canonical(self):
        assert DirectedCycle((2, 0, 1)).users == (0, 1, 2)
        assert DirectedCycle((2, 1, 0)) != DirectedCycle((0, 1, 2))

    def test_cycle_needs_distinct_users(self):
        with pytest.raises(ValueError):
            DirectedCycle((1, 1))


class TestBuildRegion:
    def test_example_a(self):
        reg = build_region(EXAMPLE_A)
        assert [c.rhs for c in reg] == [1, 1, Fraction(6, 5)]
        assert reg.exact

    def test_single_user(self):
        reg = build_region([[0.7]])
        assert len(reg) == 1 and reg[0].rhs == Fraction(7, 10)

    def test_three_user_symmetric(self):
        reg = build_region(SYM3)
        by_len = {}
        for c in reg:
            by_len.setdefault((c.kind, len(c.users)), set()).add(c.rhs)
        assert by_len == {
            ("individual", 1): {2},
            ("cycle", 2): {3},
            ("cycle", 3): {Fraction(9, 2)},
        }

    def test_json_export(self):
        js = build_region(EXAMPLE_A).to_json()
        assert js[2] == {"kind": "cycle", "users": [1, 2], "rhs": "6/5"}

    def test_non_tin_flagged(self):
        assert not build_region([[1, 0.6], [0.6, 1]]).exact

    @settings(max_examples=200)
    @given(tin_matrices(max_k=4, denominator=6))
    def test_rhs_nonnegative_under_tin(self, a):
        assert all(c.rhs >= 0 for c in build_region(a))

    @given(tin_matrices(min_k=2, max_k=4))
    def test_matches_oracle_constraints(self, a):
        got = {(c.users, c.rhs) for c in build_region(a)}
        assert got == set(oracles.region_constraints(a.alpha))


class TestContains:
    def test_boundary(self):
        assert contains(build_region(EXAMPLE_A), (0.6, 0.6)) == (True, None)

    def test_cycle_violation(self):
        ok, c = contains(build_region(EXAMPLE_A), (1.0, 0.4))
        assert not ok and c.kind == "cycle" and c.users == (0, 1)

    @given(tin_matrices())
    def test_origin_inside(self, a):
        assert contains(build_region(a), [0] * a.n_receivers)[0]

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeError):
            contains(build_region(EXAMPLE_A), (0, 0, 0))


class TestSumGdof:
    def test_example_a(self):
        s = sum_gdof(EXAMPLE_A)
        assert s.value == Fraction(6, 5)
        assert s.argmax == (Fraction(3, 5), Fraction(3, 5))

    def test_single_user(self):
        assert sum_gdof([[0.7]]).value == Fraction(7, 10)

    def test_three_user(self):
        s = sum_gdof(SYM3)
        assert s.value == Fraction(9, 2)
        assert s.argmax == (Fraction(3, 2),) * 3

    def test_two_user_closed_form(self):
        rng = random.Random(3)
        for _ in range(50):
            a = random_tin_alpha(2, rng)
            assert sum_gdof(a).value == oracles.two_user_sum_gdof(a.alpha)

    @given(tin_matrices(max_k=4, denominator=5))
    def test_argmax_is_feasible_and_optimal(self, a):
        s = sum_gdof(a)
        reg = build_region(a)
        assert contains(reg, s.argmax)[0]
        assert sum(s.argmax) == s.value

    @given(tin_matrices(max_k=3), st.data())
    def test_permutation_invariant(self, a, data):
        perm = data.draw(st.permutations(range(a.n_receivers)))
        assert sum_gdof(a.permuted(perm)).value == sum_gdof(a).value

    @given(tin_matrices(max_k=3), st.integers(1, 6))
    def test_scales_linearly(self, a, k):
        lam = Fraction(k, 3)
        assert sum_gdof(a.scaled(lam)).value == lam * sum_gdof(a).value

    @given(tin_matrices(max_k=3), st.data())
    def test_monotone_in_diagonal(self, a, data):
        i = data.draw(st.integers(0, a.n_receivers - 1))
        rows = [list(r) for r in a.alpha]
        rows[i][i] += Fraction(data.draw(st.integers(1, 5)), 10)
        assert sum_gdof(rows).value >= sum_gdof(a).value

    @given(tin_matrices(min_k=2, max_k=3), st.data())
    def test_antitone_in_cross_links(self, a, data):
        # lowering one cross link can only help (it stays TIN-optimal)
        K = a.n_receivers
        i = data.draw(st.integers(0, K - 1))
        j = data.draw(st.integers(0, K - 1).filter(lambda j: j != i))
        rows = [list(r) for r in a.alpha]
        rows[i][j] = rows[i][j] / 2
        assert check_tin_condition(rows).holds
        assert sum_gdof(rows).value >= sum_gdof(a).value

    @given(tin_matrices(max_k=4, denominator=7))
    def test_lp_matches_vertex_oracles(self, a):
        v = sum_gdof(a).value
        assert v == oracle_sum_gdof(a)
        if a.n_receivers <= 3:
            assert v == oracles.vertex_max_sum(oracles.region_constraints(a.alpha), a.n_receivers)

    def test_infeasible_when_rhs_negative(self):
        # strong cross links make a cycle rhs negative; the polytope is empty
        with pytest.raises(InfeasibleError):
            sum_gdof([[1, 2], [2, 1]])

    def test_k8_within_cap(self):
        # the full cycle set at the enumeration cap still solves
        a = random_tin_alpha(8, random.Random(8))
        t0 = time.perf_counter()
        s = sum_gdof(a)
        assert contains(build_region(a), s.argmax)[0]
        assert time.perf_counter() - t0 < 120


class TestOracle:
    def test_example(self):
        assert oracle_sum_gdof(EXAMPLE_A) == Fraction(6, 5)
        assert oracle_sum_gdof([[0.7]]) == Fraction(7, 10)

    def test_cap(self):
        with pytest.raises(ResourceLimitError):
            oracle_sum_gdof(random_tin_alpha(5, random.Random(1)))

    def test_raw_constraints(self):
        cons = [RegionConstraint("individual", (0,), Fraction(1, 3)), RegionConstraint("cycle", (0, 1), 1)]
        assert oracle_max_sum(cons, 2) == 1


class TestXChannel:
    def test_example(self):
        cert = x_sum_gdof(EXAMPLE_A)
        assert cert.value == cert.ic_value == Fraction(6, 5)
        assert cert.identical_constraints and cert.note == "identical constraint sets"

    def test_single_user(self):
        assert x_sum_gdof([[0.7]]).value == Fraction(7, 10)

    def test_three_user(self):
        assert x_sum_gdof(SYM3).value == Fraction(9, 2)

    @given(tin_matrices(max_k=4))
    def test_identity_under_tin(self, a):
        cert = x_sum_gdof(a)
        assert cert.identical_constraints and cert.value == cert.ic_value

    def test_constraints_differ_without_tin(self):
        assert not x_sum_gdof([[1, 0.6], [0.6, 1]]).identical_constraints
