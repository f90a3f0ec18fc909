"""Cache-aided interference alignment (CIA) schemes for two messages A, B,
two users and N >= 2 databases.

Both corner points share one randomization rule.  Split each message into
blocks (two halves for corner 1, two cached blocks for corner 2).  On the block
cached by user ``h``, the message demanded by the *other* user (``theta[2-h]``)
is coded with a uniformly permuted copy of the rows of ``Y`` and is therefore
decodable directly.  The remaining message is aligned: all databases use the
same coefficient vector ``g`` for it, drawn uniformly from the rows of ``Y``,
and database N sends that aligned combination separately so it can be
subtracted.  The demand vectors (1,2) and (1,1) fall out of this rule, and
(2,1), (2,2) are their mirror images.

A randomness realization is ``(draw1, draw2, perm1, perm2)``: the row index of
the aligned ``g`` on blocks 1 and 2, and the lexicographic index of the row
permutation used on blocks 1 and 2.  There are ``N**2 * (N!)**2`` equiprobable
realizations per demand.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import DecodeFailure, InvalidParameter, ParamMismatch, SingularMatrix
from .gf2 import (BitMatrix, BitVector, ChunkedMap, apply_rows, invert, permutation_from_index,
                  permute_rows, rank, y_matrix, y_prime_matrix)
from .system import (Answer, CacheContent, LinearCombos, MessageLibrary, Query, Scheme,
                     SystemParams, UncodedIndices, make_cache)

Realization = tuple[int, int, int, int]


def _other(m: int) -> int:
    return 3 - m


def _permuted_message(theta: Sequence[int], h: int) -> int:
    """Message coded with a permuted copy of Y on block ``h`` (1 or 2)."""
    return theta[2 - h]


def _check_N(N: int) -> None:
    if N < 2:
        raise InvalidParameter(f"CIA schemes need N >= 2 databases, got {N}")


def _realizations(N: int) -> Iterator[Realization]:
    nperm = math.factorial(N)
    return itertools.product(range(N), range(N), range(nperm), range(nperm))


def _sample(N: int, rng: np.random.Generator) -> Realization:
    nperm = math.factorial(N)
    d = rng.integers(N, size=2)
    p = rng.integers(nperm, size=2)
    return int(d[0]), int(d[1]), int(p[0]), int(p[1])


@functools.lru_cache(maxsize=1024)
def _permuted(base: BitMatrix, index: int) -> BitMatrix:
    return permute_rows(base, permutation_from_index(base.nrows, index))


def _block_vectors(base: BitMatrix, theta, realization: Realization):
    """Per block h: ({message: [vector for DB 1..N-1]}, {message: g}) over ``base`` rows."""
    N = base.nrows
    draws, perms = realization[:2], realization[2:]
    out = []
    for h in (1, 2):
        p = _permuted_message(theta, h)
        o = _other(p)
        stack = _permuted(base, perms[h - 1])
        aligned = base.row(draws[h - 1])
        vecs = {p: [stack.row(n) for n in range(N - 1)], o: [aligned] * (N - 1)}
        gs = {p: stack.row(N - 1), o: aligned}
        out.append((vecs, gs))
    return out


@functools.lru_cache(maxsize=4096)
def _bits_of(x: BitVector) -> tuple[int, ...]:
    return x.bits()


def _db_rows(base: BitMatrix, theta, realization: Realization, db: int) -> list[dict[int, BitVector]]:
    """Per block: the row of ``base`` that ``db`` uses for each message.  Same
    rule as ``_block_vectors`` restricted to one database."""
    out = []
    for h in (1, 2):
        p = _permuted_message(theta, h)
        out.append({p: _permuted(base, realization[1 + h]).row(db - 1),
                    _other(p): base.row(realization[h - 1])})
    return out


def _vec_payload(vecs) -> tuple[tuple[int, ...], ...]:
    return tuple(_bits_of(x) for x in vecs)


@functools.lru_cache(maxsize=65536)
def _parse_cached(vectors: tuple[tuple[int, ...], ...], length: int) -> tuple[int, ...]:
    out = []
    for v in vectors:
        x = BitVector.from_bits(v)
        if x.length != length:
            raise ParamMismatch(f"coefficient vector has length {x.length}, expected {length}")
        out.append(x.value)
    return tuple(out)


def _parse_vectors(vectors, length: int) -> tuple[int, ...]:
    return _parse_cached(tuple(tuple(v) for v in vectors), length)


def _safe_inverse(m: BitMatrix, what: str) -> tuple[int, ...]:
    try:
        return invert(m).row_values
    except SingularMatrix as e:
        raise DecodeFailure(f"{what}: {e}") from e


def tabulate_decoder(run, widths: Sequence[int], cache_len: int, L: int):
    """Turn a linear decoder closure into table lookups.

    The closure is probed with each unit (answer bit, cache bit) input; the
    zero input must decode to zero.
    """
    offsets = [sum(widths[:i]) for i in range(len(widths))]
    total = sum(widths)

    def probe(x: int) -> int:
        answers = [Answer(db + 1, BitVector(w, (x >> off) & ((1 << w) - 1)))
                   for db, (w, off) in enumerate(zip(widths, offsets))]
        return run(answers, BitVector(cache_len, x >> total)).value

    if probe(0):
        raise DecodeFailure("decoder is not linear")
    table = ChunkedMap([probe(1 << j) for j in range(total + cache_len)])
    pairs = list(zip(range(len(widths)), offsets))

    def fast(answers: Sequence[Answer], cache: BitVector) -> BitVector:
        x = cache.value << total
        for i, off in pairs:
            x |= answers[i].bits.value << off
        return BitVector(L, table(x))

    return fast


class _CiaBase(Scheme):
    N: int

    def sample(self, theta, rng):
        return _sample(self.N, rng)

    def domain_size(self, theta) -> int:
        return self.N ** 2 * math.factorial(self.N) ** 2

    def realizations(self, theta):
        p = Fraction(1, self.domain_size(theta))
        for r in _realizations(self.N):
            yield r, p

    def db_marginal(self, theta, db: int):
        """(realization, probability) pairs with the exact distribution of the query
        seen by ``db``.  That query depends only on the two draws and on the rows
        the two permutations place at position ``db - 1``, each uniform, so one
        representative permutation per row suffices."""
        N = self.N
        reps: dict[int, int] = {}
        for idx in range(math.factorial(N)):
            reps.setdefault(permutation_from_index(N, idx)[db - 1], idx)
        p = Fraction(1, N ** 4)
        for d1, d2, r1, r2 in itertools.product(range(N), repeat=4):
            yield (d1, d2, reps[r1], reps[r2]), p

    def answer(self, query: Query, library: MessageLibrary) -> Answer:
        self.check_library(library)
        return self.answerer(query)(library)

    def decode(self, user, theta, realization, queries, answers, cache: BitVector) -> BitVector:
        return self.decoder(user, theta, realization, queries)(answers, cache)


# --- corner 1 -----------------------------------------------------------------------

@dataclass(frozen=True)
class Cia1Coefficients:
    """``u[n] = (u_{n,1}, u_{n,2})`` and ``v[n] = (v_{n,1}, v_{n,2})`` for DB n+1 < N;
    ``g = (g_1, g_2, g_3, g_4)`` for DB N, all rows of ``Y_N``."""

    N: int
    u: tuple[tuple[BitVector, BitVector], ...]
    v: tuple[tuple[BitVector, BitVector], ...]
    g: tuple[BitVector, BitVector, BitVector, BitVector]

    def vec(self, msg: int, n: int, h: int) -> BitVector:
        """Coefficient of message ``msg`` on half ``h`` at DB ``n`` (0-based n < N-1)."""
        return (self.u if msg == 1 else self.v)[n][h - 1]

    def gvec(self, msg: int, h: int) -> BitVector:
        return self.g[_g_index(msg, h)]


def _g_index(msg: int, h: int) -> int:
    # g_1 = A half 1, g_2 = B half 1, g_3 = A half 2, g_4 = B half 2
    return 2 * (h - 1) + (msg - 1)


@functools.lru_cache(maxsize=65536)
def cia1_coefficients_from(N: int, theta: tuple[int, ...], realization: Realization) -> Cia1Coefficients:
    blocks = _block_vectors(y_matrix(N), theta, realization)
    u = tuple((blocks[0][0][1][n], blocks[1][0][1][n]) for n in range(N - 1))
    v = tuple((blocks[0][0][2][n], blocks[1][0][2][n]) for n in range(N - 1))
    g = (blocks[0][1][1], blocks[0][1][2], blocks[1][1][1], blocks[1][1][2])
    return Cia1Coefficients(N, u, v, g)


def cia1_coefficients(theta: Sequence[int], N: int, rng: np.random.Generator) -> Cia1Coefficients:
    _check_N(N)
    return cia1_coefficients_from(N, tuple(theta), _sample(N, rng))


def _cache_stack(N: int, g: BitVector) -> BitMatrix:
    return BitMatrix(N, tuple(1 << j for j in range(N - 1)) + (g.value,))


def _direct_stack(c: Cia1Coefficients, h: int, msg: int) -> BitMatrix:
    return BitMatrix(c.N, tuple(c.vec(msg, n, h).value for n in range(c.N - 1)) + (c.gvec(msg, h).value,))


def check_fullrank_cia1(c: Cia1Coefficients, theta: Sequence[int]) -> bool:
    """Cache-assisted stacks [I_{N-1}, 0; g_j] for all four g's, plus the two
    directly decoded stacks [x_{1,h}; ...; x_{N-1,h}; g_{x,h}]."""
    N = c.N
    if any(rank(_cache_stack(N, g)) < N for g in c.g):
        return False
    return all(rank(_direct_stack(c, h, _permuted_message(theta, h))) == N for h in (1, 2))


def check_alignment_cia1(c: Cia1Coefficients, theta: Sequence[int]) -> bool:
    for h in (1, 2):
        o = _other(_permuted_message(theta, h))
        if any(c.vec(o, n, h) != c.gvec(o, h) for n in range(c.N - 1)):
            return False
    return True


def _cia1_query(c: Cia1Coefficients, db: int) -> Query:
    if db == c.N:
        vecs = c.g
    else:
        n = db - 1
        vecs = [c.u[n][0], c.v[n][0], c.u[n][1], c.v[n][1]]
    return Query(db, {"scheme": "cia1", "db": db, "vectors": _vec_payload(vecs)})


def _cia1_queries(c: Cia1Coefficients) -> list[Query]:
    return [_cia1_query(c, db) for db in range(1, c.N + 1)]


@functools.lru_cache(maxsize=65536)
def _cia1_answerer(N: int, db: int, vecs: tuple[int, ...]) -> Callable[[MessageLibrary], Answer]:
    mask = (1 << N) - 1

    def run(library: MessageLibrary) -> Answer:
        a, b = library.messages[0].value, library.messages[1].value
        a1, a2, b1, b2 = a & mask, a >> N, b & mask, b >> N
        if db < N:
            u1, v1, u2, v2 = vecs
            bits = ((u1 & a1).bit_count() & 1) ^ ((v1 & b1).bit_count() & 1) | (((u2 & a2).bit_count() & 1) ^ ((v2 & b2).bit_count() & 1)) << 1
            return Answer(db, BitVector(2, bits))
        g1, g2, g3, g4 = vecs
        bits = ((g1 & a1).bit_count() & 1) | ((g2 & b1).bit_count() & 1) << 1 | ((g3 & a2).bit_count() & 1) << 2 | ((g4 & b2).bit_count() & 1) << 3
        return Answer(db, BitVector(4, bits))

    return run


def _cia1_direct(c: Cia1Coefficients, h: int, msg: int) -> Callable[[list[int]], int]:
    """Decoder for half ``h`` of ``msg``, which must be the permuted message there:
    strip the aligned combination from each DB answer and invert the stack."""
    N = c.N
    inv = _safe_inverse(_direct_stack(c, h, msg), f"CIA-1 half {h}")
    aligned_bit, own_bit = _g_index(_other(msg), h), _g_index(msg, h)

    def run(vals: list[int]) -> int:
        last = vals[N - 1]
        ga = (last >> aligned_bit) & 1
        rhs = ((last >> own_bit) & 1) << (N - 1)
        for n in range(N - 1):
            rhs |= ((vals[n] >> (h - 1)) & 1 ^ ga) << n
        return apply_rows(inv, rhs)

    return run


def cia1_decoder(user: int, theta: Sequence[int], c: Cia1Coefficients):
    """Compile the decoder of ``user``: a function of (answers, cache bits)."""
    N = c.N
    want = theta[user - 1]
    far = _cia1_direct(c, 3 - user, want)
    p = _permuted_message(theta, user)
    if p == want:
        # equal demands: the cache is not needed
        direct = _cia1_direct(c, user, want)

        def near(vals: list[int], cache: int) -> int:
            return direct(vals)
    else:
        interference = _cia1_direct(c, user, p)
        inv = _safe_inverse(_cache_stack(N, c.gvec(want, user)), "CIA-1 cache stack")
        g_bit = _g_index(want, user)
        low = (1 << (N - 1)) - 1

        def near(vals: list[int], cache: int) -> int:
            # cache bit j is A_j + B_j on this half; subtract the decoded interference
            rhs = (cache ^ interference(vals)) & low | ((vals[N - 1] >> g_bit) & 1) << (N - 1)
            return apply_rows(inv, rhs)

    def run(answers: Sequence[Answer], cache: BitVector) -> BitVector:
        vals = [a.bits.value for a in answers]
        halves = {3 - user: far(vals), user: near(vals, cache.value)}
        return BitVector(2 * N, halves[1] | halves[2] << N)

    return run


def cia1_decode(user: int, theta: Sequence[int], answers: Sequence[Answer], cache: BitVector,
                coeffs: Cia1Coefficients) -> BitVector:
    return cia1_decoder(user, theta, coeffs)(answers, cache)


@functools.lru_cache(maxsize=16384)
def _cia1_tabulated(N: int, user: int, theta: tuple[int, ...], realization: Realization):
    run = cia1_decoder(user, theta, cia1_coefficients_from(N, theta, realization))
    return tabulate_decoder(run, [2] * (N - 1) + [4], N - 1, 2 * N)


class Cia1Scheme(_CiaBase):
    """Corner point ``((N-1)/(2N), (N+1)/N)`` with ``L = 2N``."""

    name = "cia1"

    def __init__(self, N: int):
        _check_N(N)
        self.N = N
        self.params = SystemParams(K=2, Ku=2, N=N, L=2 * N, M=Fraction(N - 1, 2 * N))

    def cache_description(self, user: int) -> LinearCombos:
        N = self.N
        off = (user - 1) * N
        layout = tuple((1, off + j) for j in range(N - 1)) + tuple((2, off + j) for j in range(N - 1))
        rows = tuple((1 << j) | (1 << (N - 1 + j)) for j in range(N - 1))
        return LinearCombos(layout, BitMatrix(2 * (N - 1), rows))

    def place(self, library: MessageLibrary) -> list[CacheContent]:
        self.check_library(library)
        return [make_cache(u, self.cache_description(u), library) for u in (1, 2)]

    def coefficients(self, theta, realization) -> Cia1Coefficients:
        return cia1_coefficients_from(self.N, tuple(theta), tuple(realization))

    def queries(self, theta, realization) -> list[Query]:
        return _cia1_queries(self.coefficients(theta, realization))

    def query(self, theta, realization, db: int) -> Query:
        b1, b2 = _db_rows(y_matrix(self.N), theta, realization, db)
        vecs = (b1[1], b1[2], b2[1], b2[2])
        return Query(db, {"scheme": "cia1", "db": db, "vectors": _vec_payload(vecs)})

    def answerer(self, query: Query):
        vecs = _parse_vectors(query.payload["vectors"], self.N)
        if len(vecs) != 4:
            raise ParamMismatch(f"CIA-1 query to DB {query.db} must carry 4 vectors")
        return _cia1_answerer(self.N, query.db, vecs)

    def decoder(self, user, theta, realization, queries):
        return _cia1_tabulated(self.N, user, tuple(theta), tuple(realization))


def cia1_place(library: MessageLibrary) -> list[CacheContent]:
    if library.K != 2 or library.L % 2:
        raise ParamMismatch("CIA-1 needs K=2 and L=2N")
    return Cia1Scheme(library.L // 2).place(library)


def cia1_answers(coeffs: Cia1Coefficients, library: MessageLibrary) -> list[Answer]:
    scheme = Cia1Scheme(coeffs.N)
    return [scheme.answer(q, library) for q in _cia1_queries(coeffs)]


# --- corner 2 -----------------------------------------------------------------------

@dataclass(frozen=True)
class Cia2Coefficients:
    """``u[n]``, ``v[n]`` for DB n+1 < N and ``g = (g_1, g_2)`` for DB N; every
    vector has length 2N-1 and final coordinate 1."""

    N: int
    u: tuple[BitVector, ...]
    v: tuple[BitVector, ...]
    g: tuple[BitVector, BitVector]

    def vec(self, msg: int, n: int) -> BitVector:
        return (self.u if msg == 1 else self.v)[n]

    def gvec(self, msg: int) -> BitVector:
        return self.g[msg - 1]

    def block(self, h: int) -> tuple[int, int]:
        return (h - 1) * (self.N - 1), h * (self.N - 1)


@functools.lru_cache(maxsize=4096)
def _cia2_join(b1: BitVector, b2: BitVector) -> BitVector:
    return b1.concat(b2, BitVector(1, 1))


@functools.lru_cache(maxsize=65536)
def cia2_coefficients_from(N: int, theta: tuple[int, ...], realization: Realization) -> Cia2Coefficients:
    blocks = _block_vectors(y_prime_matrix(N), theta, realization)
    u = tuple(_cia2_join(blocks[0][0][1][n], blocks[1][0][1][n]) for n in range(N - 1))
    v = tuple(_cia2_join(blocks[0][0][2][n], blocks[1][0][2][n]) for n in range(N - 1))
    g = tuple(_cia2_join(blocks[0][1][m], blocks[1][1][m]) for m in (1, 2))
    return Cia2Coefficients(N, u, v, g)


def cia2_coefficients(theta: Sequence[int], N: int, rng: np.random.Generator) -> Cia2Coefficients:
    _check_N(N)
    return cia2_coefficients_from(N, tuple(theta), _sample(N, rng))


def _cia2_restricted(c: Cia2Coefficients, x: BitVector, h: int) -> BitVector:
    """Coordinates of ``x`` on block ``h`` followed by the final coordinate."""
    a, b = c.block(h)
    return x.slice(a, b).concat(x.slice(2 * c.N - 2, 2 * c.N - 1))


def _cia2_stack(c: Cia2Coefficients, h: int, msg: int) -> BitMatrix:
    rows = [_cia2_restricted(c, c.vec(msg, n), h) for n in range(c.N - 1)]
    rows.append(_cia2_restricted(c, c.gvec(msg), h))
    return BitMatrix.from_rows(rows, c.N)


def check_fullrank_cia2(c: Cia2Coefficients, theta: Sequence[int]) -> bool:
    """On each block, the permuted vectors and their g, restricted to the block
    plus the final coordinate, must form an invertible N x N matrix."""
    return all(rank(_cia2_stack(c, h, _permuted_message(theta, h))) == c.N for h in (1, 2))


def check_alignment_cia2(c: Cia2Coefficients, theta: Sequence[int]) -> bool:
    N = c.N
    vectors = list(c.u) + list(c.v) + list(c.g)
    if any(x[2 * N - 2] != 1 for x in vectors):
        return False
    for h in (1, 2):
        o = _other(_permuted_message(theta, h))
        a, b = c.block(h)
        if any(c.vec(o, n).slice(a, b) != c.gvec(o).slice(a, b) for n in range(N - 1)):
            return False
    return True


def _cia2_query(c: Cia2Coefficients, db: int) -> Query:
    vecs = c.g if db == c.N else (c.u[db - 1], c.v[db - 1])
    return Query(db, {"scheme": "cia2", "db": db, "vectors": _vec_payload(vecs)})


def _cia2_queries(c: Cia2Coefficients) -> list[Query]:
    return [_cia2_query(c, db) for db in range(1, c.N + 1)]


@functools.lru_cache(maxsize=65536)
def _cia2_answerer(N: int, db: int, vecs: tuple[int, ...]) -> Callable[[MessageLibrary], Answer]:
    def run(library: MessageLibrary) -> Answer:
        a, b = library.messages[0].value, library.messages[1].value
        if db < N:
            u, v = vecs
            return Answer(db, BitVector(1, ((u & a).bit_count() & 1) ^ ((v & b).bit_count() & 1)))
        g1, g2 = vecs
        return Answer(db, BitVector(2, ((g1 & a).bit_count() & 1) | ((g2 & b).bit_count() & 1) << 1))

    return run


def cia2_decoder(user: int, theta: Sequence[int], c: Cia2Coefficients):
    """Every DB-n answer minus the aligned g-combination, corrected by the cached
    bits, is a combination of the demanded message on the far block plus its
    final bit; DB N's own g-combination supplies the N-th equation."""
    N = c.N
    want = theta[user - 1]
    o = _other(want)
    far = 3 - user
    inv = _safe_inverse(_cia2_stack(c, far, want), f"CIA-2 user {user}")
    low = (1 << (N - 1)) - 1
    shift = (user - 1) * (N - 1)
    o_masks = [c.vec(o, n).value for n in range(N - 1)]
    w_masks = [c.vec(want, n).value for n in range(N - 1)]
    g_o, g_w = c.gvec(o).value, c.gvec(want).value

    def run(answers: Sequence[Answer], cache: BitVector) -> BitVector:
        # the cache holds A then B on block `user`; place them at their message coordinates
        known = {1: (cache.value & low) << shift, 2: (cache.value >> (N - 1)) << shift}
        ko, kw = known[o], known[want]
        last = answers[N - 1].bits.value
        aligned = (last >> (o - 1)) & 1 ^ ((g_o & ko).bit_count() & 1)
        rhs = ((last >> (want - 1)) & 1 ^ ((g_w & kw).bit_count() & 1)) << (N - 1)
        for n in range(N - 1):
            r = answers[n].bits.value & 1 ^ aligned ^ ((o_masks[n] & ko).bit_count() & 1) ^ ((w_masks[n] & kw).bit_count() & 1)
            rhs |= r << n
        x = apply_rows(inv, rhs)
        blocks = {user: kw >> shift, far: x & low}
        value = blocks[1] | blocks[2] << (N - 1) | (x >> (N - 1)) << (2 * N - 2)
        return BitVector(2 * N - 1, value)

    return run


def cia2_decode(user: int, theta: Sequence[int], answers: Sequence[Answer], cache: BitVector,
                coeffs: Cia2Coefficients) -> BitVector:
    return cia2_decoder(user, theta, coeffs)(answers, cache)


@functools.lru_cache(maxsize=16384)
def _cia2_tabulated(N: int, user: int, theta: tuple[int, ...], realization: Realization):
    run = cia2_decoder(user, theta, cia2_coefficients_from(N, theta, realization))
    return tabulate_decoder(run, [1] * (N - 1) + [2], 2 * (N - 1), 2 * N - 1)


class Cia2Scheme(_CiaBase):
    """Corner point ``(2(N-1)/(2N-1), (N+1)/(2N-1))`` with ``L = 2N-1``."""

    name = "cia2"

    def __init__(self, N: int):
        _check_N(N)
        self.N = N
        self.params = SystemParams(K=2, Ku=2, N=N, L=2 * N - 1, M=Fraction(2 * (N - 1), 2 * N - 1))

    def cache_description(self, user: int) -> UncodedIndices:
        off = (user - 1) * (self.N - 1)
        return UncodedIndices(tuple((m, off + j) for m in (1, 2) for j in range(self.N - 1)))

    def place(self, library: MessageLibrary) -> list[CacheContent]:
        self.check_library(library)
        return [make_cache(u, self.cache_description(u), library) for u in (1, 2)]

    def coefficients(self, theta, realization) -> Cia2Coefficients:
        return cia2_coefficients_from(self.N, tuple(theta), tuple(realization))

    def queries(self, theta, realization) -> list[Query]:
        return _cia2_queries(self.coefficients(theta, realization))

    def query(self, theta, realization, db: int) -> Query:
        b1, b2 = _db_rows(y_prime_matrix(self.N), theta, realization, db)
        vecs = (_cia2_join(b1[1], b2[1]), _cia2_join(b1[2], b2[2]))
        return Query(db, {"scheme": "cia2", "db": db, "vectors": _vec_payload(vecs)})

    def answerer(self, query: Query):
        vecs = _parse_vectors(query.payload["vectors"], self.params.L)
        if len(vecs) != 2:
            raise ParamMismatch(f"CIA-2 query to DB {query.db} must carry 2 vectors")
        return _cia2_answerer(self.N, query.db, vecs)

    def decoder(self, user, theta, realization, queries):
        return _cia2_tabulated(self.N, user, tuple(theta), tuple(realization))


def cia2_place(library: MessageLibrary) -> list[CacheContent]:
    if library.K != 2 or library.L % 2 == 0:
        raise ParamMismatch("CIA-2 needs K=2 and L=2N-1")
    return Cia2Scheme((library.L + 1) // 2).place(library)


def cia2_answers(coeffs: Cia2Coefficients, library: MessageLibrary) -> list[Answer]:
    scheme = Cia2Scheme(coeffs.N)
    return [scheme.answer(q, library) for q in _cia2_queries(coeffs)]
