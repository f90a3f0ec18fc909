"""Distinct-demand schemes for two messages A, B, two users and two databases
with ``L = 3``: corner points (1/3, 4/3) and (2/3, 1).

Each database has two public answer variants.  A fair coin picks the variant
of DB 1; DB 2 uses the same variant index when ``theta = (1, 2)`` and the other
one when ``theta = (2, 1)``.  Each database therefore sees a uniformly random
variant under either demand.

Linear forms are packed ints over the six library bits
``(A_1, A_2, A_3, B_1, B_2, B_3)`` at bit positions 0..5.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .errors import DecodeFailure, InvalidParameter
from .gf2 import BitMatrix, BitVector, parity, span_coefficients
from .system import (Answer, CacheContent, LinearCombos, MessageLibrary, Query, Scheme, SystemParams,
                     UncodedIndices, make_cache)

DISTINCT_DEMANDS = [(1, 2), (2, 1)]


def _form(*terms: str) -> int:
    """``_form("A1", "B3")`` -> packed linear form over (A_1..A_3, B_1..B_3)."""
    out = 0
    for t in terms:
        out |= 1 << ((0 if t[0] == "A" else 3) + int(t[1]) - 1)
    return out


# answer variants per (db, variant); each a tuple of linear forms
CORNER1_ANSWERS = {
    (1, 1): (_form("A3"), _form("B1", "B2", "B3")),
    (1, 2): (_form("A1", "A2", "A3"), _form("B3")),
    (2, 1): (_form("A2", "A3"), _form("B2", "B3")),
    (2, 2): (_form("A1", "A3"), _form("B1", "B3")),
}
CORNER2_ANSWERS = {
    (1, 1): (_form("A3", "B3", "B1", "B2"),),
    (1, 2): (_form("A3", "B3", "A1", "A2"),),
    (2, 1): CORNER1_ANSWERS[2, 1],
    (2, 2): CORNER1_ANSWERS[2, 2],
}
CORNER1_CACHE = {1: (_form("A1", "B1"),), 2: (_form("A2", "B2"),)}
CORNER2_CACHE = {1: (_form("A1"), _form("B1")), 2: (_form("A2"), _form("B2"))}


def pairing(coin: int, theta: Sequence[int]) -> tuple[int, int]:
    """(DB 1 variant, DB 2 variant) for coin in {0, 1}."""
    v1 = coin + 1
    v2 = v1 if tuple(theta) == (1, 2) else 3 - v1
    return v1, v2


class DistinctScheme(Scheme):
    def __init__(self, name: str, M: Fraction, answers: dict, cache_forms: dict):
        self.name = name
        self.params = SystemParams(K=2, Ku=2, N=2, L=3, M=M)
        self.answers_table = answers
        self.cache_forms = cache_forms

    def demand_set(self):
        return list(DISTINCT_DEMANDS)

    def cache_description(self, user: int):
        forms = self.cache_forms[user]
        layout = tuple((m, j) for m in (1, 2) for j in range(3))
        if all(f.bit_count() == 1 for f in forms):
            return UncodedIndices(tuple(layout[f.bit_length() - 1] for f in forms))
        return LinearCombos(layout, BitMatrix(6, forms))

    def place(self, library: MessageLibrary) -> list[CacheContent]:
        self.check_library(library)
        return [make_cache(u, self.cache_description(u), library) for u in (1, 2)]

    def sample(self, theta, rng):
        return int(rng.integers(2))

    def domain_size(self, theta) -> int:
        return 2

    def realizations(self, theta):
        for coin in (0, 1):
            yield coin, Fraction(1, 2)

    def queries(self, theta, realization) -> list[Query]:
        variants = pairing(realization, theta)
        return [Query(n, {"scheme": self.name, "db": n, "variant": variants[n - 1]}) for n in (1, 2)]

    def answer(self, query: Query, library: MessageLibrary) -> Answer:
        self.check_library(library)
        v = query.payload["variant"]
        if v not in (1, 2) or query.db not in (1, 2):
            raise InvalidParameter(f"unknown answer variant {v} at DB {query.db}")
        x = library.messages[0].value | library.messages[1].value << 3
        forms = self.answers_table[query.db, v]
        return Answer(query.db, BitVector(len(forms), sum(parity(f & x) << i for i, f in enumerate(forms))))

    def decode(self, user, theta, realization, queries, answers, cache: BitVector) -> BitVector:
        """Solve for each demanded bit inside the span of the known forms."""
        forms = list(self.cache_forms[user])
        values = list(cache.bits())
        for q, a in zip(queries, answers):
            forms.extend(self.answers_table[q.db, q.payload["variant"]])
            values.extend(a.bits.bits())
        known = BitMatrix(6, tuple(forms))
        base = 0 if theta[user - 1] == 1 else 3
        out = 0
        for j in range(3):
            combo = span_coefficients(known, BitVector.unit(6, base + j))
            if combo is None:
                raise DecodeFailure(f"user {user} cannot resolve bit {j} of message {theta[user - 1]}")
            out |= (sum(c & v for c, v in zip(combo.bits(), values)) & 1) << j
        return BitVector(3, out)


def dd_corner1() -> DistinctScheme:
    """Memory 1/3, load 4/3."""
    return DistinctScheme("dd1", Fraction(1, 3), CORNER1_ANSWERS, CORNER1_CACHE)


def dd_corner2() -> DistinctScheme:
    """Memory 2/3, load 1."""
    return DistinctScheme("dd2", Fraction(2, 3), CORNER2_ANSWERS, CORNER2_CACHE)
