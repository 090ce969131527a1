import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dignets.gf2 import (
    BitMatrix,
    BitVector,
    digits_to_fraction_num,
    int_to_digit_tuple,
    int_to_digits_lsb,
    mat_vec_mul,
    radix_collapse,
    rank_of_stacked_rows,
    reverse_bits,
)


def _np_rank(rows, n):
    m = np.array([[(r >> k) & 1 for k in range(n)] for r in rows], dtype=np.uint8)
    rank = 0
    for col in range(n):
        piv = next((i for i in range(rank, len(m)) if m[i, col]), None)
        if piv is None:
            continue
        m[[rank, piv]] = m[[piv, rank]]
        for i in range(len(m)):
            if i != rank and m[i, col]:
                m[i] ^= m[rank]
        rank += 1
    return rank


def test_bitvector_roundtrip():
    v = BitVector.from_list([1, 0, 1, 1])
    assert v.bits == 0b1101
    assert v.to_list() == [1, 0, 1, 1]
    assert v[2] == 1 and len(v) == 4
    with pytest.raises(ValueError):
        BitVector(2, 4)
    with pytest.raises(ValueError):
        BitVector.from_list([2])


def test_matrix_parse_dump():
    text = "100\n011\n001\n"
    m = BitMatrix.parse(text)
    assert m.to_lists() == [[1, 0, 0], [0, 1, 1], [0, 0, 1]]
    assert m.dumps() == text
    with pytest.raises(ValueError):
        BitMatrix.parse("10\n2 1\n")
    with pytest.raises(ValueError):
        BitMatrix.parse("101\n01\n")


def test_identity_and_anti_identity():
    n = 5
    v = BitVector.from_list([1, 1, 0, 0, 1])
    assert mat_vec_mul(BitMatrix.identity(n), v) == v
    assert mat_vec_mul(BitMatrix.anti_identity(n), v).to_list() == list(reversed(v.to_list()))


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        mat_vec_mul(BitMatrix.identity(3), BitVector(4, 0))


@given(st.integers(1, 12), st.data())
def test_rank_matches_dense_elimination(n, data):
    rows = data.draw(st.lists(st.integers(0, (1 << n) - 1), min_size=0, max_size=n + 3))
    assert rank_of_stacked_rows([BitVector(n, r) for r in rows]) == _np_rank(rows, n)


@given(st.integers(1, 10), st.data())
def test_mat_vec_linear(n, data):
    rows = tuple(data.draw(st.lists(st.integers(0, (1 << n) - 1), min_size=n, max_size=n)))
    m = BitMatrix(n, rows)
    u = BitVector(n, data.draw(st.integers(0, (1 << n) - 1)))
    w = BitVector(n, data.draw(st.integers(0, (1 << n) - 1)))
    assert mat_vec_mul(m, u ^ w) == mat_vec_mul(m, u) ^ mat_vec_mul(m, w)


@given(st.integers(1, 16), st.data())
def test_digit_conventions(n, data):
    r = data.draw(st.integers(0, (1 << n) - 1))
    v = int_to_digits_lsb(r, n)
    assert sum(b << k for k, b in enumerate(v.to_list())) == r
    # radix collapse reads v[0] as the 1/2 digit
    assert radix_collapse(v) == digits_to_fraction_num(v.to_list())
    assert reverse_bits(reverse_bits(r, n), n) == r
    assert digits_to_fraction_num(int_to_digit_tuple(r, n)) == r


def test_digit_range_errors():
    with pytest.raises(ValueError):
        int_to_digits_lsb(8, 3)
    with pytest.raises(ValueError):
        int_to_digit_tuple(-1, 3)
    assert int_to_digit_tuple(0, 0) == []


@given(st.integers(-(2**200), 2**200), st.integers(1, 2**200), st.integers(-(2**200), 2**200), st.integers(1, 2**200))
def test_rational_roundtrip(a, b, c, d):
    x, y = Fraction(a, b), Fraction(c, d)
    assert (x + y) - y == x
    assert x.denominator > 0 and math.gcd(x.numerator, x.denominator) == 1
