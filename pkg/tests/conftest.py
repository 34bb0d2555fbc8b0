import random
from fractions import Fraction

import pytest
from hypothesis import settings, strategies as st

from tinopt.model import StrengthMatrix

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

EXAMPLE_A = [[1, Fraction(2, 5)], [Fraction(2, 5), 1]]
SYM3 = [[2, Fraction(1, 2), Fraction(1, 2)], [Fraction(1, 2), 2, Fraction(1, 2)], [Fraction(1, 2), Fraction(1, 2), 2]]
FOUR_BY_TWO = [
    [1, Fraction(3, 10)],
    [Fraction(3, 10), 1],
    [Fraction(1, 5), Fraction(1, 10)],
    [Fraction(1, 10), Fraction(1, 5)],
]


@pytest.fixture
def rng():
    return random.Random(12345)


@st.composite
def tin_matrices(draw, min_k=1, max_k=3, denominator=10):
    K = draw(st.integers(min_k, max_k))
    a = [[Fraction(draw(st.integers(0, denominator)), denominator) for _ in range(K)] for _ in range(K)]
    for i in range(K):
        caused = max([a[j][i] for j in range(K) if j != i], default=Fraction(0))
        suffered = max([a[i][k] for k in range(K) if k != i], default=Fraction(0))
        a[i][i] = caused + suffered + Fraction(draw(st.integers(0, denominator)), denominator)
    return StrengthMatrix(a)


@st.composite
def any_matrices(draw, min_k=1, max_k=3, denominator=10, high=2):
    K = draw(st.integers(min_k, max_k))
    return StrengthMatrix(
        [[Fraction(draw(st.integers(0, high * denominator)), denominator) for _ in range(K)] for _ in range(K)]
    )
