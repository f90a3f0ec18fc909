"""Product design: coded-caching placement combined with per-subset sums of
single-user PIR answers, plus the naive full-broadcast scheme.

Placement splits every message into ``C(Ku, t)`` packets ``W_{k,T}`` indexed by
the t-subsets ``T`` of users (lexicographic order), each of ``N**K`` bits; user
``u`` caches every packet with ``u in T``.  For every (t+1)-subset ``S`` and every
``u in S`` an independent SJ plan retrieves ``W_{theta_u, S - {u}}`` from the
sub-library ``{W_{k, S - {u}}}_k``; each database XORs the answers of the plans
inside one ``S`` entrywise.  Every other user in ``S`` caches the packets needed
to strip the foreign terms.
"""
from __future__ import annotations

import functools
import itertools
import json
import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InvalidParameter, ParamMismatch
from .gf2 import BitVector
from .sjpir import (Atom, atoms_payload, decode_atoms, evaluate_atoms, index_features, parse_atoms,
                    random_perm_array, sj_plan_from, sj_rate)
from .system import (Answer, CacheContent, MessageLibrary, Query, Scheme, SystemParams, UncodedIndices,
                     make_cache)

PlanKey = tuple[tuple[int, ...], int]  # (S, u)


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=True, sort_keys=True)


@functools.lru_cache(maxsize=1 << 16)
def _plan_atoms(K: int, N: int, theta: int, perms: tuple[tuple[int, ...], ...]) -> tuple[tuple[Atom, ...], ...]:
    return sj_plan_from(K, N, theta, perms).per_db


@functools.lru_cache(maxsize=1 << 16)
def _atoms_json(K: int, N: int, theta: int, perms: tuple[tuple[int, ...], ...], db: int) -> str:
    return _dumps(atoms_payload(_plan_atoms(K, N, theta, perms)[db - 1]))


def pd_load_formula(K: int, Ku: int, N: int, t: int) -> Fraction:
    """``C(Ku, t+1) / C(Ku, t) * (1 + 1/N + ... + 1/N**(K-1))``."""
    return Fraction(math.comb(Ku, t + 1), math.comb(Ku, t)) * sj_rate(K, N)


class ProductDesign(Scheme):
    """Product design at integer ``t`` in ``[0, Ku]`` (``t = 0`` means no cache)."""

    name = "pd"

    def __init__(self, K: int, Ku: int, N: int, t: int):
        if K < 1 or Ku < 1 or N < 2:
            raise InvalidParameter(f"product design needs K, Ku >= 1 and N >= 2; got K={K}, Ku={Ku}, N={N}")
        if not 0 <= t <= Ku:
            raise InvalidParameter(f"t={t} outside [0, {Ku}]")
        self.K, self.Ku, self.N, self.t = K, Ku, N, t
        self.P = N ** K
        self.packets = list(itertools.combinations(range(1, Ku + 1), t))
        self.packet_pos = {T: i for i, T in enumerate(self.packets)}
        self.subsets = list(itertools.combinations(range(1, Ku + 1), t + 1))
        self.plan_keys: list[PlanKey] = [(S, u) for S in self.subsets for u in S]
        self.params = SystemParams(K=K, Ku=Ku, N=N, L=len(self.packets) * self.P, M=Fraction(t * K, Ku))

    # placement

    def cached_packets(self, user: int) -> list[tuple[int, ...]]:
        return [T for T in self.packets if user in T]

    def cache_description(self, user: int) -> UncodedIndices:
        entries = []
        for k in range(1, self.K + 1):
            for T in self.cached_packets(user):
                base = self.packet_pos[T] * self.P
                entries.extend((k, base + j) for j in range(self.P))
        return UncodedIndices(tuple(entries))

    def place(self, library: MessageLibrary) -> list[CacheContent]:
        self.check_library(library)
        return [make_cache(u, self.cache_description(u), library) for u in range(1, self.Ku + 1)]

    # randomness

    def sample(self, theta, rng):
        """Per-(S, u, k) permutations drawn from disjoint streams keyed by (S, u, k)."""
        master = int(rng.integers(2 ** 63))
        out = []
        for S, u in self.plan_keys:
            perms = []
            for k in range(1, self.K + 1):
                stream = np.random.default_rng(np.random.SeedSequence(master, spawn_key=(*S, u, k)))
                perms.append(tuple(int(x) for x in stream.permutation(self.P)))
            out.append(tuple(perms))
        return tuple(out)

    def domain_size(self, theta) -> int:
        return math.factorial(self.P) ** (self.K * len(self.plan_keys))

    def realizations(self, theta):
        per_plan = list(itertools.product(itertools.permutations(range(self.P)), repeat=self.K))
        p = Fraction(1, self.domain_size(theta))
        for combo in itertools.product(per_plan, repeat=len(self.plan_keys)):
            yield combo, p

    def plans(self, theta, realization) -> dict[PlanKey, tuple[tuple[Atom, ...], ...]]:
        """Per-(S, u) atoms for every database."""
        return {key: _plan_atoms(self.K, self.N, theta[key[1] - 1], tuple(perms))
                for key, perms in zip(self.plan_keys, realization)}

    # queries and answers

    def queries(self, theta, realization) -> list[Query]:
        plans = self.plans(theta, realization)
        out = []
        for n in range(1, self.N + 1):
            subsets = [{"S": list(S), "per_user": [{"u": u, "atoms": atoms_payload(plans[S, u][n - 1])} for u in S]}
                       for S in self.subsets]
            out.append(Query(n, {"scheme": "pd", "db": n, "subsets": subsets}))
        return out

    def query_key(self, theta, realization, db) -> bytes:
        # assembles the same (sorted-key) bytes as canonical_query_bytes from cached per-plan fragments
        parts = []
        it = iter(zip(self.plan_keys, realization))
        for S in self.subsets:
            users = []
            for u in S:
                (_, uu), perms = next(it)
                users.append('{"atoms":%s,"u":%d}' % (_atoms_json(self.K, self.N, theta[uu - 1], perms, db), uu))
            parts.append('{"S":%s,"per_user":[%s]}' % (_dumps(list(S)), ",".join(users)))
        return ('{"db":%d,"payload":{"db":%d,"scheme":"pd","subsets":[%s]}}' % (db, db, ",".join(parts))).encode()

    def structure(self, query: Query) -> str:
        """θ-independent projection of a query: subsets, users and atom message sets."""
        proj = [[s["S"], [[pu["u"], [a["msgs"] for a in pu["atoms"]]] for pu in s["per_user"]]]
                for s in query.payload["subsets"]]
        return _dumps({"db": query.db, "structure": proj})

    def _packet(self, library_values: Sequence[int], k: int, T: tuple[int, ...]) -> int:
        return (library_values[k - 1] >> (self.packet_pos[T] * self.P)) & ((1 << self.P) - 1)

    def answer(self, query: Query, library: MessageLibrary) -> Answer:
        self.check_library(library)
        values = [w.value for w in library.messages]
        out, offset = 0, 0
        for entry in query.payload["subsets"]:
            S = tuple(entry["S"])
            seg, width = 0, None
            for pu in entry["per_user"]:
                u = pu["u"]
                if u not in S:
                    raise ParamMismatch(f"user {u} not in subset {S}")
                atoms = parse_atoms(pu["atoms"], self.K, self.P)
                if width is None:
                    width = len(atoms)
                elif width != len(atoms):
                    raise ParamMismatch(f"per-user atom lists in {S} differ in length")
                T = tuple(x for x in S if x != u)
                if T not in self.packet_pos:
                    raise ParamMismatch(f"no packet indexed by {T}")
                seg ^= evaluate_atoms(atoms, [self._packet(values, k, T) for k in range(1, self.K + 1)])
            out |= seg << offset
            offset += width or 0
        return Answer(query.db, BitVector(offset, out))

    # decoding

    def decode(self, user, theta, realization, queries, answers, cache: BitVector) -> BitVector:
        plans = self.plans(theta, realization)
        mine = self.cached_packets(user)
        n_mine = len(mine)
        slot = {T: i for i, T in enumerate(mine)}
        mask = (1 << self.P) - 1

        def cached(k: int, T: tuple[int, ...]) -> int:
            return (cache.value >> (((k - 1) * n_mine + slot[T]) * self.P)) & mask

        want = theta[user - 1]
        recovered = {}
        offsets = [0] * self.N
        for S in self.subsets:
            widths = [len(plans[S, S[0]][n]) for n in range(self.N)]
            if user in S:
                stripped = []
                for n in range(self.N):
                    seg = (answers[n].bits.value >> offsets[n]) & ((1 << widths[n]) - 1)
                    for v in S:
                        if v == user:
                            continue
                        T = tuple(x for x in S if x != v)
                        seg ^= evaluate_atoms(plans[S, v][n], [cached(k, T) for k in range(1, self.K + 1)])
                    stripped.append(seg)
                T = tuple(x for x in S if x != user)
                recovered[T] = decode_atoms(want, self.P, plans[S, user], stripped)
            offsets = [o + w for o, w in zip(offsets, widths)]
        value = 0
        for T in self.packets:
            part = cached(want, T) if user in T else recovered[T]
            value |= part << (self.packet_pos[T] * self.P)
        return BitVector(self.params.L, value)

    # sampled audit support

    def sample_features(self, theta, db, samples, rng) -> np.ndarray:
        """Symbol indices of the DB query for ``samples`` fresh draws, shape
        (samples, features); matches the ``idx`` entries of the real query."""
        cols = []
        for S, u in self.plan_keys:
            perms = random_perm_array(samples, self.K, self.P, rng)
            cols.append(index_features(self.K, self.N, theta[u - 1], db, perms))
        if not cols:
            return np.zeros((samples, 0), dtype=np.int64)
        return np.concatenate(cols, axis=1)

    def describe(self) -> dict:
        return {**super().describe(), "t": self.t}


def pd_place(library: MessageLibrary, Ku: int, N: int, t: int) -> list[CacheContent]:
    return ProductDesign(library.K, Ku, N, t).place(library)


class NaiveScheme(Scheme):
    """Every user caches the first ``(M/K) L`` bits of every message and DB 1
    broadcasts the rest; the queries are constant, so privacy is trivial."""

    name = "naive"

    def __init__(self, K: int, Ku: int, N: int, L: int, M: Fraction):
        M = Fraction(M)
        self.params = SystemParams(K=K, Ku=Ku, N=N, L=L, M=M)
        head = M * L / K
        if head.denominator != 1:
            raise InvalidParameter(f"(M/K) L = {head} is not an integer")
        self.head = int(head)

    def place(self, library):
        self.check_library(library)
        desc = UncodedIndices(tuple((k, j) for k in range(1, self.params.K + 1) for j in range(self.head)))
        return [make_cache(u, desc, library) for u in range(1, self.params.Ku + 1)]

    def sample(self, theta, rng):
        return None

    def domain_size(self, theta) -> int:
        return 1

    def realizations(self, theta):
        yield None, Fraction(1)

    def queries(self, theta, realization):
        return [Query(n, {"scheme": "naive", "db": n, "request": "rest" if n == 1 else "none", "start": self.head})
                for n in range(1, self.params.N + 1)]

    def answer(self, query, library):
        self.check_library(library)
        if query.payload["request"] == "none":
            return Answer(query.db, BitVector(0))
        start = query.payload["start"]
        return Answer(query.db, BitVector(0).concat(*(w.slice(start, library.L) for w in library.messages)))

    def decode(self, user, theta, realization, queries, answers, cache):
        L, head = self.params.L, self.head
        want = theta[user - 1]
        rest = answers[0].bits.slice((want - 1) * (L - head), want * (L - head))
        return cache.slice((want - 1) * head, want * head).concat(rest)


def naive_scheme(K: int, Ku: int, N: int, L: int, M) -> NaiveScheme:
    return NaiveScheme(K, Ku, N, L, Fraction(M))
