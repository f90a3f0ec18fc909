"""Capacity-achieving single-user PIR over GF(2) with ``L = N**K`` bit symbols.

The query to each database is a list of atoms; an atom names a set of
messages and one symbol index per message, and is answered by the XOR of those
symbols.  The plan is built in blocks ``k = 1..K``:

* block 1: every database asks for one fresh symbol of every message;
* block k >= 2: every desired-free ``(k-1)``-atom asked at database ``n'`` is
  replayed at every other database together with one fresh desired symbol,
  and every ``k``-subset of undesired messages is asked ``(N-1)**(k-1)`` times
  with fresh symbols.

Fresh symbols come from per-message counters and are mapped through one
uniformly random permutation per message.  Atoms inside a database query are
sorted by (size, message subset, indices), so a query reveals only a set of
atoms.  Message ids are 1-based, symbol indices 0-based.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DecodeFailure, DimensionMismatch, InvalidParameter, ParamMismatch
from .gf2 import BitVector
from .system import Answer, CacheContent, MessageLibrary, Query, Scheme, SystemParams, UncodedIndices

Atom = tuple[tuple[int, ...], tuple[int, ...]]  # (messages, symbol indices)


def sj_download_per_db(K: int, N: int) -> int:
    if K < 1 or N < 1:
        raise InvalidParameter(f"need K >= 1 and N >= 1, got K={K}, N={N}")
    return sum(math.comb(K, k) * (N - 1) ** (k - 1) for k in range(1, K + 1))


def sj_rate(K: int, N: int) -> Fraction:
    """``1 + 1/N + ... + 1/N**(K-1)``."""
    return sum((Fraction(1, N ** i) for i in range(K)), Fraction(0))


def _check(K: int, N: int, theta: int) -> None:
    if K < 1 or N < 2:
        raise InvalidParameter(f"SJ PIR needs K >= 1 and N >= 2, got K={K}, N={N}")
    if not 1 <= theta <= K:
        raise InvalidParameter(f"demand {theta} outside [1, {K}]")


@functools.lru_cache(maxsize=None)
def base_plan(K: int, N: int, theta: int) -> tuple[tuple[Atom, ...], ...]:
    """Per-database atoms over unpermuted (counter) indices, in construction order."""
    _check(K, N, theta)
    counters = [0] * (K + 1)

    def fresh(m: int) -> int:
        counters[m] += 1
        return counters[m] - 1

    per_db: list[list[Atom]] = [[] for _ in range(N)]
    free: list[list[Atom]] = [[] for _ in range(N)]
    for n in range(N):
        for m in range(1, K + 1):
            atom = ((m,), (fresh(m),))
            per_db[n].append(atom)
            if m != theta:
                free[n].append(atom)
    others = [m for m in range(1, K + 1) if m != theta]
    for k in range(2, K + 1):
        new_free: list[list[Atom]] = [[] for _ in range(N)]
        for n in range(N):
            for src in range(N):
                if src == n:
                    continue
                for msgs, idx in free[src]:
                    pairs = sorted(list(zip(msgs, idx)) + [(theta, fresh(theta))])
                    per_db[n].append((tuple(p[0] for p in pairs), tuple(p[1] for p in pairs)))
            for subset in itertools.combinations(others, k):
                for _ in range((N - 1) ** (k - 1)):
                    atom = (subset, tuple(fresh(m) for m in subset))
                    per_db[n].append(atom)
                    new_free[n].append(atom)
        free = new_free
    if counters[theta] != N ** K:
        raise AssertionError("plan does not cover every desired symbol")
    return tuple(tuple(atoms) for atoms in per_db)


def _atom_key(atom: Atom):
    return len(atom[0]), atom[0], atom[1]


def permute_atoms(atoms: Sequence[Atom], perms: Sequence[Sequence[int]]) -> tuple[Atom, ...]:
    out = [(msgs, tuple(perms[m - 1][i] for m, i in zip(msgs, idx))) for msgs, idx in atoms]
    out.sort(key=_atom_key)
    return tuple(out)


@dataclass(frozen=True)
class SjPlan:
    K: int
    N: int
    theta: int
    per_db: tuple[tuple[Atom, ...], ...]
    perms: tuple[tuple[int, ...], ...]

    @property
    def L(self) -> int:
        return self.N ** self.K

    def atoms(self, db: int) -> tuple[Atom, ...]:
        return self.per_db[db - 1]

    def structure(self, db: int) -> tuple[tuple[int, tuple[int, ...]], ...]:
        """θ-independent projection: (block size, message subset) per atom."""
        return tuple((len(m), m) for m, _ in self.per_db[db - 1])


def sj_plan_from(K: int, N: int, theta: int, perms: Sequence[Sequence[int]]) -> SjPlan:
    _check(K, N, theta)
    L = N ** K
    perms = tuple(tuple(int(x) for x in p) for p in perms)
    if len(perms) != K or any(sorted(p) != list(range(L)) for p in perms):
        raise InvalidParameter(f"need {K} permutations of range({L})")
    per_db = tuple(permute_atoms(atoms, perms) for atoms in base_plan(K, N, theta))
    return SjPlan(K, N, theta, per_db, perms)


def random_perms(K: int, L: int, rng: np.random.Generator) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(x) for x in rng.permutation(L)) for _ in range(K))


def sj_plan(K: int, N: int, theta: int, rng: np.random.Generator) -> SjPlan:
    _check(K, N, theta)
    return sj_plan_from(K, N, theta, random_perms(K, N ** K, rng))


def evaluate_atoms(atoms: Sequence[Atom], messages: Sequence[int]) -> int:
    """Packed answer bits; ``messages[m-1]`` is message m packed into an int."""
    out = 0
    for i, (msgs, idx) in enumerate(atoms):
        b = 0
        for m, j in zip(msgs, idx):
            b ^= (messages[m - 1] >> j) & 1
        out |= b << i
    return out


def sj_answer(plan: SjPlan, db: int, library: MessageLibrary) -> BitVector:
    if library.K != plan.K or library.L != plan.L:
        raise DimensionMismatch(f"plan needs K={plan.K}, L={plan.L}; got K={library.K}, L={library.L}")
    atoms = plan.atoms(db)
    return BitVector(len(atoms), evaluate_atoms(atoms, [w.value for w in library.messages]))


def decode_atoms(theta: int, L: int, per_db: Sequence[Sequence[Atom]], answers: Sequence[int]) -> int:
    """Recover message ``theta`` (packed) from per-DB atoms and packed answer bits."""
    side: dict[frozenset, int] = {}
    for atoms, bits in zip(per_db, answers):
        for i, (msgs, idx) in enumerate(atoms):
            if theta not in msgs:
                side[frozenset(zip(msgs, idx))] = (bits >> i) & 1
    value, seen = 0, 0
    for atoms, bits in zip(per_db, answers):
        for i, (msgs, idx) in enumerate(atoms):
            if theta not in msgs:
                continue
            rest = frozenset((m, j) for m, j in zip(msgs, idx) if m != theta)
            if rest and rest not in side:
                raise DecodeFailure(f"side information {sorted(rest)} was never downloaded")
            j = idx[msgs.index(theta)]
            if seen >> j & 1:
                raise DecodeFailure(f"desired symbol {j} appears twice")
            seen |= 1 << j
            value |= (((bits >> i) & 1) ^ side.get(rest, 0)) << j
    if seen != (1 << L) - 1:
        raise DecodeFailure("some desired symbols were never downloaded")
    return value


def sj_decode(plan: SjPlan, answers: Sequence[BitVector]) -> BitVector:
    if len(answers) != plan.N:
        raise DimensionMismatch(f"expected {plan.N} answers, got {len(answers)}")
    for db, a in enumerate(answers, start=1):
        if a.length != len(plan.atoms(db)):
            raise DimensionMismatch(f"DB {db} answer has {a.length} bits, plan has {len(plan.atoms(db))} atoms")
    return BitVector(plan.L, decode_atoms(plan.theta, plan.L, plan.per_db, [a.value for a in answers]))


def atoms_payload(atoms: Sequence[Atom]) -> list[dict]:
    return [{"msgs": list(m), "idx": list(i)} for m, i in atoms]


def parse_atoms(payload: Sequence[dict], K: int, L: int) -> tuple[Atom, ...]:
    out = []
    for a in payload:
        msgs, idx = tuple(a["msgs"]), tuple(a["idx"])
        if len(msgs) != len(idx) or not msgs or len(set(msgs)) != len(msgs):
            raise ParamMismatch(f"malformed atom {a}")
        if any(not 1 <= m <= K for m in msgs) or any(not 0 <= j < L for j in idx):
            raise ParamMismatch(f"atom {a} out of range")
        out.append((msgs, idx))
    return tuple(out)


@functools.lru_cache(maxsize=None)
def _groups(K: int, N: int, theta: int, db: int) -> tuple[tuple[tuple[int, ...], np.ndarray], ...]:
    """Atoms of the base plan at ``db`` grouped by message subset, in canonical
    group order; each group carries its counter indices as an (atoms, k) array."""
    by_msgs: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
    for msgs, idx in base_plan(K, N, theta)[db - 1]:
        by_msgs.setdefault(msgs, []).append(idx)
    order = sorted(by_msgs, key=lambda m: (len(m), m))
    return tuple((m, np.array(by_msgs[m], dtype=np.int64)) for m in order)


def random_perm_array(samples: int, K: int, L: int, rng: np.random.Generator) -> np.ndarray:
    """``samples`` independent draws of K uniform permutations, shape (samples, K, L)."""
    return np.argsort(rng.random((samples, K, L)), axis=2)


def index_features(K: int, N: int, theta: int, db: int, perms: np.ndarray) -> np.ndarray:
    """Symbol indices of the canonical DB query, flattened in atom order, for a
    batch of permutation draws ``perms`` of shape (samples, K, L).

    Equals the ``idx`` entries of ``sj_plan_from(...).atoms(db)`` read in order;
    this is the vectorized path used by the sampled privacy audit.
    """
    L = N ** K
    samples = perms.shape[0]
    rows = np.arange(samples)[:, None, None]
    out = []
    for msgs, counters in _groups(K, N, theta, db):
        msg_axis = np.array([m - 1 for m in msgs])[None, None, :]
        vals = perms[rows, msg_axis, counters[None, :, :]]  # (samples, atoms, k)
        key = np.zeros(vals.shape[:2], dtype=np.int64)
        for i in range(vals.shape[2]):
            key = key * L + vals[:, :, i]
        order = np.argsort(key, axis=1)
        out.append(np.take_along_axis(vals, order[:, :, None], axis=1).reshape(samples, -1))
    return np.concatenate(out, axis=1)


class SjScheme(Scheme):
    """Single-user scheme (``Ku = 1``, no cache) wrapping one SJ plan.

    A realization is the tuple of K permutations.
    """

    name = "sj"

    def __init__(self, K: int, N: int):
        _check(K, N, 1)
        self.K, self.N = K, N
        self.params = SystemParams(K=K, Ku=1, N=N, L=N ** K, M=Fraction(0))

    def place(self, library):
        self.check_library(library)
        return [CacheContent(1, BitVector(0), UncodedIndices(()))]

    def sample(self, theta, rng):
        return random_perms(self.K, self.params.L, rng)

    def domain_size(self, theta) -> int:
        return math.factorial(self.params.L) ** self.K

    def realizations(self, theta):
        perms = list(itertools.permutations(range(self.params.L)))
        p = Fraction(1, self.domain_size(theta))
        for combo in itertools.product(perms, repeat=self.K):
            yield combo, p

    def plan(self, theta, realization) -> SjPlan:
        return sj_plan_from(self.K, self.N, theta[0], realization)

    def queries(self, theta, realization) -> list[Query]:
        plan = self.plan(theta, realization)
        return [Query(n, {"scheme": "sj", "db": n, "atoms": atoms_payload(plan.atoms(n))})
                for n in range(1, self.N + 1)]

    def sample_features(self, theta, db, samples, rng) -> np.ndarray:
        perms = random_perm_array(samples, self.K, self.params.L, rng)
        return index_features(self.K, self.N, theta[0], db, perms)

    def answer(self, query, library):
        self.check_library(library)
        atoms = parse_atoms(query.payload["atoms"], self.K, self.params.L)
        return Answer(query.db, BitVector(len(atoms), evaluate_atoms(atoms, [w.value for w in library.messages])))

    def decode(self, user, theta, realization, queries, answers, cache):
        return sj_decode(self.plan(theta, realization), [a.bits for a in answers])
