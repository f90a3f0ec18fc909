"""Dense linear algebra over GF(2).

Vectors and matrix rows are packed into Python integers: coordinate ``j`` of a
vector lives in bit ``j`` of its integer.  Matrices here never exceed a few
dozen rows, so plain integers beat any array library for clarity and speed.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidParameter, SingularMatrix


def _pack(bits: Iterable[int]) -> tuple[int, int]:
    value = 0
    n = 0
    for j, b in enumerate(bits):
        if b not in (0, 1):
            raise InvalidParameter(f"bit {j} is {b!r}, expected 0 or 1")
        value |= b << j
        n = j + 1
    return value, n


@dataclass(frozen=True)
class BitVector:
    length: int
    value: int = 0

    def __post_init__(self):
        if self.length < 0:
            raise InvalidParameter("negative length")
        if self.value >> self.length:
            raise InvalidParameter("value has bits beyond length")

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitVector":
        value, n = _pack(bits)
        return cls(n, value)

    @classmethod
    def zeros(cls, n: int) -> "BitVector":
        return cls(n, 0)

    @classmethod
    def unit(cls, n: int, j: int) -> "BitVector":
        return cls(n, 1 << j)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "BitVector":
        return cls.from_bits(int(b) for b in rng.integers(0, 2, size=n))

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, j: int) -> int:
        if not -self.length <= j < self.length:
            raise IndexError(j)
        return (self.value >> (j % self.length)) & 1

    def __iter__(self):
        return iter(self.bits())

    def bits(self) -> tuple[int, ...]:
        return tuple((self.value >> j) & 1 for j in range(self.length))

    def __xor__(self, other: "BitVector") -> "BitVector":
        if other.length != self.length:
            raise DimensionMismatch(f"{self.length} vs {other.length}")
        return BitVector(self.length, self.value ^ other.value)

    __add__ = __xor__

    def dot(self, other: "BitVector") -> int:
        if other.length != self.length:
            raise DimensionMismatch(f"{self.length} vs {other.length}")
        return (self.value & other.value).bit_count() & 1

    def concat(self, *others: "BitVector") -> "BitVector":
        value, n = self.value, self.length
        for o in others:
            value |= o.value << n
            n += o.length
        return BitVector(n, value)

    def slice(self, start: int, stop: int) -> "BitVector":
        if not 0 <= start <= stop <= self.length:
            raise DimensionMismatch(f"slice {start}:{stop} of length {self.length}")
        n = stop - start
        return BitVector(n, (self.value >> start) & ((1 << n) - 1))

    def select(self, positions: Sequence[int]) -> "BitVector":
        return BitVector.from_bits(self[p] for p in positions) if positions else BitVector(0)

    def weight(self) -> int:
        return self.value.bit_count()

    def to_json(self) -> list[int]:
        return list(self.bits())

    def __repr__(self) -> str:
        return "BitVector(" + "".join(map(str, self.bits())) + ")"


@dataclass(frozen=True)
class BitMatrix:
    ncols: int
    row_values: tuple[int, ...]

    def __post_init__(self):
        if self.ncols < 0:
            raise InvalidParameter("negative column count")
        for r in self.row_values:
            if r < 0 or r >> self.ncols:
                raise InvalidParameter("row has bits beyond column count")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int] | BitVector], ncols: int | None = None) -> "BitMatrix":
        vecs = [r if isinstance(r, BitVector) else BitVector.from_bits(r) for r in rows]
        if ncols is None:
            if not vecs:
                raise InvalidParameter("cannot infer column count of an empty matrix")
            ncols = vecs[0].length
        for v in vecs:
            if v.length != ncols:
                raise DimensionMismatch("ragged rows")
        return cls(ncols, tuple(v.value for v in vecs))

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(n, tuple(1 << j for j in range(n)))

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "BitMatrix":
        return cls(ncols, (0,) * nrows)

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.ncols, self.row_values))
            object.__setattr__(self, "_hash", h)
        return h

    @property
    def nrows(self) -> int:
        return len(self.row_values)

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def row(self, i: int) -> BitVector:
        return BitVector(self.ncols, self.row_values[i])

    def rows(self) -> list[BitVector]:
        return [BitVector(self.ncols, r) for r in self.row_values]

    def vstack(self, *others: "BitMatrix") -> "BitMatrix":
        values = list(self.row_values)
        for o in others:
            if o.ncols != self.ncols:
                raise DimensionMismatch("column counts differ")
            values.extend(o.row_values)
        return BitMatrix(self.ncols, tuple(values))

    def transpose(self) -> "BitMatrix":
        cols = []
        for j in range(self.ncols):
            v = 0
            for i, r in enumerate(self.row_values):
                v |= ((r >> j) & 1) << i
            cols.append(v)
        return BitMatrix(self.nrows, tuple(cols))

    def to_lists(self) -> list[list[int]]:
        return [list(self.row(i).bits()) for i in range(self.nrows)]

    to_json = to_lists

    def __repr__(self) -> str:
        return "BitMatrix(" + ";".join("".join(map(str, r)) for r in self.to_lists()) + ")"


def _eliminate(rows: list[int], ncols: int, track: bool = False):
    """Row-reduce ``rows`` in place; returns (pivot columns, history).

    With ``track`` set, ``history[i]`` is a bitmask of the original rows XORed
    into reduced row ``i``.
    """
    history = [1 << i for i in range(len(rows))] if track else None
    pivots = []
    r = 0
    for col in range(ncols):
        bit = 1 << col
        pivot = next((i for i in range(r, len(rows)) if rows[i] & bit), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        if track:
            history[r], history[pivot] = history[pivot], history[r]
        for i in range(len(rows)):
            if i != r and rows[i] & bit:
                rows[i] ^= rows[r]
                if track:
                    history[i] ^= history[r]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return pivots, history


def parity(x: int) -> int:
    """GF(2) sum of the bits of a packed integer."""
    return x.bit_count() & 1


def apply_rows(row_values: Sequence[int], x: int) -> int:
    """Packed matrix-vector product on raw row integers (no length checks)."""
    out = 0
    for i, r in enumerate(row_values):
        out |= ((r & x).bit_count() & 1) << i
    return out


class ChunkedMap:
    """A GF(2)-linear map on packed ints, given by the images of the unit
    vectors and evaluated with one lookup table per 8-bit input chunk."""

    __slots__ = ("width", "tables")

    def __init__(self, columns: Sequence[int]):
        self.width = len(columns)
        self.tables = []
        for lo in range(0, self.width, 8):
            cols = columns[lo:lo + 8]
            table = [0] * (1 << len(cols))
            for i in range(1, len(table)):
                low = i & -i
                table[i] = table[i ^ low] ^ cols[low.bit_length() - 1]
            self.tables.append(table)

    def __call__(self, x: int) -> int:
        out = 0
        for table in self.tables:
            out ^= table[x & 0xFF]
            x >>= 8
        return out


def rank(m: BitMatrix) -> int:
    pivots, _ = _eliminate(list(m.row_values), m.ncols)
    return len(pivots)


def mat_vec(m: BitMatrix, v: BitVector) -> BitVector:
    if v.length != m.ncols:
        raise DimensionMismatch(f"matrix has {m.ncols} columns, vector has length {v.length}")
    out = 0
    for i, r in enumerate(m.row_values):
        out |= ((r & v.value).bit_count() & 1) << i
    return BitVector(m.nrows, out)


def mat_mul(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    if a.ncols != b.nrows:
        raise DimensionMismatch(f"{a.shape} @ {b.shape}")
    out = []
    for r in a.row_values:
        acc = 0
        j = 0
        while r:
            if r & 1:
                acc ^= b.row_values[j]
            r >>= 1
            j += 1
        out.append(acc)
    return BitMatrix(b.ncols, tuple(out))


def invert(m: BitMatrix) -> BitMatrix:
    n = m.nrows
    if n != m.ncols:
        raise DimensionMismatch(f"cannot invert a {m.nrows}x{m.ncols} matrix")
    # Gauss-Jordan on [m | I]: identity occupies the high n bits of each row.
    rows = [r | (1 << (n + i)) for i, r in enumerate(m.row_values)]
    pivots, _ = _eliminate(rows, n)
    if len(pivots) < n:
        raise SingularMatrix(f"rank {len(pivots)} < {n}")
    return BitMatrix(n, tuple(r >> n for r in rows))


@functools.lru_cache(maxsize=4096)
def _cached_inverse(m: BitMatrix) -> BitMatrix:
    return invert(m)


def solve(m: BitMatrix, rhs: BitVector) -> BitVector:
    """Return ``x`` with ``m @ x == rhs`` for square, full-rank ``m``.

    Decoders solve the same few small systems over and over, so inverses are
    memoized (matrices are immutable and hashable).
    """
    if m.nrows != m.ncols:
        raise DimensionMismatch("solve needs a square matrix")
    if rhs.length != m.nrows:
        raise DimensionMismatch(f"rhs length {rhs.length} != {m.nrows}")
    return mat_vec(_cached_inverse(m), rhs)


def span_coefficients(m: BitMatrix, target: BitVector) -> BitVector | None:
    """Find ``c`` with ``sum_i c_i * row_i == target``, or None if ``target``
    is outside the row space."""
    if target.length != m.ncols:
        raise DimensionMismatch("target length differs from column count")
    rows = list(m.row_values)
    pivots, history = _eliminate(rows, m.ncols, track=True)
    rem, combo = target.value, 0
    for i, col in enumerate(pivots):
        if rem >> col & 1:
            rem ^= rows[i]
            combo ^= history[i]
    if rem:
        return None
    return BitVector(m.nrows, combo)


def y_matrix(n: int) -> BitMatrix:
    """N x N matrix whose first N-1 rows are e_i + e_N and last row is e_N."""
    if n < 2:
        raise InvalidParameter(f"n must be >= 2, got {n}")
    last = 1 << (n - 1)
    return BitMatrix(n, tuple([(1 << i) | last for i in range(n - 1)] + [last]))


def y_prime_matrix(n: int) -> BitMatrix:
    """N x (N-1) matrix: the identity rows followed by a zero row."""
    if n < 2:
        raise InvalidParameter(f"n must be >= 2, got {n}")
    return BitMatrix(n - 1, tuple([1 << i for i in range(n - 1)] + [0]))


def permutation_from_index(n: int, index: int) -> tuple[int, ...]:
    """Unrank ``index`` in the lexicographic order of permutations of range(n)."""
    if not 0 <= index < math.factorial(n):
        raise InvalidParameter(f"permutation index {index} out of range for n={n}")
    pool = list(range(n))
    out = []
    for i in range(n, 0, -1):
        q, index = divmod(index, math.factorial(i - 1))
        out.append(pool.pop(q))
    return tuple(out)


def permutation_index(perm: Sequence[int]) -> int:
    pool = sorted(perm)
    index = 0
    for i, p in enumerate(perm):
        q = pool.index(p)
        index += q * math.factorial(len(perm) - 1 - i)
        pool.pop(q)
    return index


def all_permutations(n: int) -> Iterable[tuple[int, ...]]:
    # itertools yields lexicographic order, matching permutation_index
    return itertools.permutations(range(n))


def permute_rows(m: BitMatrix, perm: Sequence[int]) -> BitMatrix:
    """Row ``i`` of the result is row ``perm[i]`` of ``m``."""
    if sorted(perm) != list(range(m.nrows)):
        raise InvalidParameter("not a permutation of the row indices")
    return BitMatrix(m.ncols, tuple(m.row_values[p] for p in perm))


def random_row_permutation(m: BitMatrix, rng: np.random.Generator) -> tuple[BitMatrix, int]:
    index = int(rng.integers(math.factorial(m.nrows)))
    return permute_rows(m, permutation_from_index(m.nrows, index)), index
