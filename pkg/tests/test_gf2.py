from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mupir.errors import DimensionMismatch, InvalidParameter, SingularMatrix
from mupir.gf2 import (BitMatrix, BitVector, ChunkedMap, all_permutations, apply_rows, invert, mat_mul,
                       mat_vec, permutation_from_index, permutation_index, permute_rows, rank, solve,
                       span_coefficients, y_matrix, y_prime_matrix)


def to_np(m: BitMatrix) -> np.ndarray:
    return np.array(m.to_lists(), dtype=np.int64).reshape(m.nrows, m.ncols)


def span_size(m: BitMatrix) -> int:
    """Oracle: number of distinct GF(2) combinations of the rows."""
    seen = set()
    for coeffs in itertools.product((0, 1), repeat=m.nrows):
        v = 0
        for c, r in zip(coeffs, m.row_values):
            if c:
                v ^= r
        seen.add(v)
    return len(seen)


matrices = st.integers(0, 5).flatmap(
    lambda r: st.integers(1, 6).flatmap(
        lambda c: st.lists(st.integers(0, 2 ** c - 1), min_size=r, max_size=r).map(
            lambda rows: BitMatrix(c, tuple(rows)))))

square = st.integers(1, 6).flatmap(
    lambda n: st.lists(st.integers(0, 2 ** n - 1), min_size=n, max_size=n).map(lambda rows: BitMatrix(n, tuple(rows))))


def test_bitvector_roundtrip_and_ops():
    v = BitVector.from_bits([1, 0, 1, 1])
    assert v.length == 4 and v.value == 0b1101
    assert v.bits() == (1, 0, 1, 1)
    assert v[0] == 1 and v[1] == 0 and v[-1] == 1
    w = BitVector.from_bits([0, 1, 1, 0])
    assert (v ^ w).bits() == (1, 1, 0, 1)
    assert v.dot(w) == 1
    assert v.concat(w).bits() == (1, 0, 1, 1, 0, 1, 1, 0)
    assert v.slice(1, 3).bits() == (0, 1)
    assert v.select([3, 0]).bits() == (1, 1)
    assert v.weight() == 3


def test_bitvector_rejects_bad_input():
    with pytest.raises(InvalidParameter):
        BitVector.from_bits([0, 2])
    with pytest.raises(InvalidParameter):
        BitVector(2, 4)
    with pytest.raises(DimensionMismatch):
        BitVector(2, 1) ^ BitVector(3, 1)
    with pytest.raises(DimensionMismatch):
        BitVector(2, 1).slice(1, 3)


@given(st.lists(st.integers(0, 1), min_size=1, max_size=40), st.lists(st.integers(0, 1), min_size=1, max_size=40))
def test_dot_matches_numpy(a, b):
    n = min(len(a), len(b))
    a, b = a[:n], b[:n]
    assert BitVector.from_bits(a).dot(BitVector.from_bits(b)) == int(np.dot(a, b)) % 2


@given(matrices)
def test_rank_matches_span_size(m):
    assert 2 ** rank(m) == span_size(m)


@given(matrices)
def test_rank_of_transpose(m):
    assert rank(m) == rank(m.transpose())
    assert rank(m) <= min(m.nrows, m.ncols)


@given(square)
def test_invert_or_singular(m):
    if rank(m) < m.nrows:
        with pytest.raises(SingularMatrix):
            invert(m)
        return
    inv = invert(m)
    prod = (to_np(m) @ to_np(inv)) % 2
    assert (prod == np.eye(m.nrows, dtype=np.int64)).all()
    assert invert(inv) == m


@given(matrices, st.data())
def test_mat_vec_and_mat_mul_match_numpy(m, data):
    x = BitVector(m.ncols, data.draw(st.integers(0, 2 ** m.ncols - 1)))
    expected = (to_np(m) @ np.array(x.bits(), dtype=np.int64)) % 2 if m.nrows else np.zeros(0)
    assert list(mat_vec(m, x).bits()) == [int(v) for v in expected]
    assert apply_rows(m.row_values, x.value) == mat_vec(m, x).value
    other = BitMatrix(3, tuple(data.draw(st.integers(0, 7)) for _ in range(m.ncols)))
    got = mat_mul(m, other)
    if m.nrows:
        assert got.to_lists() == ((to_np(m) @ to_np(other)) % 2).tolist()


@given(square, st.data())
def test_solve(m, data):
    if rank(m) < m.nrows:
        return
    x = BitVector(m.ncols, data.draw(st.integers(0, 2 ** m.ncols - 1)))
    assert solve(m, mat_vec(m, x)) == x


@given(matrices, st.data())
def test_span_coefficients(m, data):
    target = BitVector(m.ncols, data.draw(st.integers(0, 2 ** m.ncols - 1)))
    c = span_coefficients(m, target)
    combos = set()
    for coeffs in itertools.product((0, 1), repeat=m.nrows):
        v = 0
        for ci, r in zip(coeffs, m.row_values):
            if ci:
                v ^= r
        combos.add(v)
    if target.value in combos:
        assert c is not None
        assert mat_vec(m.transpose(), c) == target
    else:
        assert c is None


@given(st.lists(st.integers(0, 4095), max_size=20), st.integers(0, 2 ** 20 - 1))
def test_chunked_map_matches_column_sum(cols, x):
    x &= (1 << len(cols)) - 1
    expected = 0
    for j, c in enumerate(cols):
        if x >> j & 1:
            expected ^= c
    assert ChunkedMap(cols)(x) == expected


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_y_matrices(n):
    y = y_matrix(n)
    assert y.shape == (n, n) and rank(y) == n
    # every row has a 1 in the last coordinate
    assert all(r >> (n - 1) & 1 for r in y.row_values)
    yp = y_prime_matrix(n)
    assert yp.shape == (n, n - 1)
    assert yp.row_values[-1] == 0 and rank(yp) == n - 1


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_permutation_ranking_is_lexicographic(n):
    perms = list(itertools.permutations(range(n)))
    assert [permutation_from_index(n, i) for i in range(math.factorial(n))] == perms
    assert [permutation_index(p) for p in perms] == list(range(len(perms)))
    assert list(all_permutations(n)) == perms


def test_permute_rows():
    m = BitMatrix(2, (1, 2, 3))
    assert permute_rows(m, (2, 0, 1)).row_values == (3, 1, 2)
    with pytest.raises(InvalidParameter):
        permute_rows(m, (0, 0, 1))
