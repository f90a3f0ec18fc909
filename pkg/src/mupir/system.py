"""Problem model: messages, caches, demands, queries, answers and transcripts.

Every concrete scheme subclasses :class:`Scheme`.  Conventions used throughout
the package:

* messages, users and databases are numbered from 1 (``theta = (1, 2)`` means
  user 1 wants message 1 and user 2 wants message 2);
* bit positions inside a message are numbered from 0.
"""
from __future__ import annotations

import itertools
import json
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidDemand, InvalidParameter, NotEnumerable, ParamMismatch
from .gf2 import BitMatrix, BitVector, mat_vec


def frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_frac(s: str | int | Fraction) -> Fraction:
    return Fraction(s)


@dataclass(frozen=True)
class SystemParams:
    K: int
    Ku: int
    N: int
    L: int
    M: Fraction

    def __post_init__(self):
        object.__setattr__(self, "M", Fraction(self.M))
        if self.K < 1 or self.Ku < 1 or self.N < 1 or self.L < 1:
            raise InvalidParameter(f"K, Ku, N, L must be positive: {self}")
        if not 0 <= self.M <= self.K:
            raise InvalidParameter(f"M={self.M} outside [0, K={self.K}]")
        if (self.M * self.L).denominator != 1:
            raise InvalidParameter(f"M*L = {self.M * self.L} is not an integer number of bits")

    @property
    def cache_bits(self) -> int:
        return int(self.M * self.L)

    def to_json(self) -> dict:
        return {"K": self.K, "Ku": self.Ku, "N": self.N, "L": self.L, "M": frac_str(self.M)}


@dataclass(frozen=True)
class MessageLibrary:
    K: int
    L: int
    messages: tuple[BitVector, ...]

    def __post_init__(self):
        if len(self.messages) != self.K:
            raise ParamMismatch(f"expected {self.K} messages, got {len(self.messages)}")
        for w in self.messages:
            if w.length != self.L:
                raise ParamMismatch(f"message length {w.length} != {self.L}")

    @classmethod
    def from_bits(cls, messages: Sequence[Sequence[int]]) -> "MessageLibrary":
        vecs = tuple(BitVector.from_bits(m) for m in messages)
        return cls(len(vecs), vecs[0].length, vecs)

    @classmethod
    def random(cls, K: int, L: int, rng: np.random.Generator) -> "MessageLibrary":
        return cls(K, L, tuple(BitVector.random(L, rng) for _ in range(K)))

    @classmethod
    def zeros(cls, K: int, L: int) -> "MessageLibrary":
        return cls(K, L, tuple(BitVector.zeros(L) for _ in range(K)))

    def message(self, k: int) -> BitVector:
        """Message ``k`` (1-based)."""
        return self.messages[k - 1]

    def bit(self, k: int, j: int) -> int:
        return self.messages[k - 1][j]

    def segment(self, start: int, stop: int) -> "MessageLibrary":
        return MessageLibrary(self.K, stop - start, tuple(w.slice(start, stop) for w in self.messages))


def validate_demand(theta: Sequence[int], K: int, Ku: int) -> tuple[int, ...]:
    theta = tuple(int(x) for x in theta)
    if len(theta) != Ku:
        raise InvalidDemand(f"demand {theta} has length {len(theta)}, expected {Ku}")
    if any(not 1 <= x <= K for x in theta):
        raise InvalidDemand(f"demand {theta} has entries outside [1, {K}]")
    return theta


# --- cache contents -----------------------------------------------------------------

@dataclass(frozen=True)
class UncodedIndices:
    """Cached bit ``i`` is bit ``entries[i][1]`` of message ``entries[i][0]``."""

    entries: tuple[tuple[int, int], ...]

    def evaluate(self, library: MessageLibrary) -> BitVector:
        return BitVector.from_bits(library.bit(k, j) for k, j in self.entries) if self.entries else BitVector(0)

    def shifted(self, offset: int) -> "UncodedIndices":
        return UncodedIndices(tuple((k, j + offset) for k, j in self.entries))

    def as_linear(self) -> "LinearCombos":
        n = len(self.entries)
        return LinearCombos(self.entries, BitMatrix.identity(n))

    def to_json(self) -> dict:
        return {"kind": "uncoded", "entries": [list(e) for e in self.entries]}


@dataclass(frozen=True)
class LinearCombos:
    """Cached bit ``i`` is ``coeffs.row(i)`` dotted with the library bits listed
    in ``layout`` (one (message, bit) pair per column)."""

    layout: tuple[tuple[int, int], ...]
    coeffs: BitMatrix

    def __post_init__(self):
        if self.coeffs.ncols != len(self.layout):
            raise DimensionMismatch("coefficient columns do not match layout")

    def evaluate(self, library: MessageLibrary) -> BitVector:
        if not self.layout:
            return BitVector(self.coeffs.nrows)
        x = BitVector.from_bits(library.bit(k, j) for k, j in self.layout)
        return mat_vec(self.coeffs, x)

    def shifted(self, offset: int) -> "LinearCombos":
        return LinearCombos(tuple((k, j + offset) for k, j in self.layout), self.coeffs)

    def as_linear(self) -> "LinearCombos":
        return self

    def to_json(self) -> dict:
        return {"kind": "linear", "layout": [list(e) for e in self.layout], "coeffs": self.coeffs.to_json()}


CacheDescription = UncodedIndices | LinearCombos


def merge_descriptions(parts: Sequence[CacheDescription]) -> CacheDescription:
    if all(isinstance(p, UncodedIndices) for p in parts):
        return UncodedIndices(tuple(e for p in parts for e in p.entries))
    lins = [p.as_linear() for p in parts]
    layout = tuple(e for p in lins for e in p.layout)
    rows = []
    col = 0
    for p in lins:
        rows.extend(r << col for r in p.coeffs.row_values)
        col += p.coeffs.ncols
    return LinearCombos(layout, BitMatrix(col, tuple(rows)))


@dataclass(frozen=True)
class CacheContent:
    user: int
    stored_bits: BitVector
    description: CacheDescription

    def to_json(self) -> dict:
        return {"user": self.user, "bits": self.stored_bits.to_json(), "description": self.description.to_json()}


def make_cache(user: int, description: CacheDescription, library: MessageLibrary) -> CacheContent:
    return CacheContent(user, description.evaluate(library), description)


# --- queries and answers ------------------------------------------------------------

@dataclass(frozen=True)
class Query:
    db: int
    payload: Any

    def __eq__(self, other):
        return isinstance(other, Query) and canonical_query_bytes(self) == canonical_query_bytes(other)

    def __hash__(self):
        return hash(canonical_query_bytes(self))


def _dumps(obj: Any) -> str:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=True, sort_keys=True)


def canonical_query_bytes(q: Query) -> bytes:
    """Serialization used as the privacy-audit key.

    Keys are sorted and schemes emit list elements in a fixed order, so byte
    equality coincides with semantic equality.
    """
    return _dumps({"db": q.db, "payload": q.payload}).encode()


def parse_query(data: bytes) -> Query:
    obj = json.loads(data)
    return Query(obj["db"], obj["payload"])


@dataclass(frozen=True)
class Answer:
    db: int
    bits: BitVector


# --- scheme interface ---------------------------------------------------------------

class Scheme(ABC):
    """Placement + query generation + answering + decoding.

    ``sample`` draws one randomness realization from an explicitly passed
    generator.  Schemes with a finite randomness domain also implement
    ``realizations`` (exact ``(realization, probability)`` pairs).
    """

    name: str = "scheme"
    params: SystemParams

    def demand_set(self) -> list[tuple[int, ...]]:
        return list(itertools.product(range(1, self.params.K + 1), repeat=self.params.Ku))

    def check_demand(self, theta: Sequence[int]) -> tuple[int, ...]:
        theta = validate_demand(theta, self.params.K, self.params.Ku)
        if theta not in set(self.demand_set()):
            raise InvalidDemand(f"{self.name} does not support demand {theta}")
        return theta

    def check_library(self, library: MessageLibrary) -> None:
        if library.K != self.params.K or library.L != self.params.L:
            raise ParamMismatch(
                f"{self.name} needs K={self.params.K}, L={self.params.L}; got K={library.K}, L={library.L}")

    @abstractmethod
    def place(self, library: MessageLibrary) -> list[CacheContent]:
        ...

    @abstractmethod
    def sample(self, theta: tuple[int, ...], rng: np.random.Generator) -> Any:
        ...

    def domain_size(self, theta: tuple[int, ...]) -> int | None:
        """Number of realizations, or None when the domain is seeded-only."""
        return None

    def realizations(self, theta: tuple[int, ...]) -> Iterator[tuple[Any, Fraction]]:
        raise NotEnumerable(f"{self.name} has no enumerable randomness domain")

    @abstractmethod
    def queries(self, theta: tuple[int, ...], realization: Any) -> list[Query]:
        ...

    @abstractmethod
    def answer(self, query: Query, library: MessageLibrary) -> Answer:
        ...

    @abstractmethod
    def decode(self, user: int, theta: tuple[int, ...], realization: Any,
               queries: Sequence[Query], answers: Sequence[Answer], cache: BitVector) -> BitVector:
        ...

    def answerer(self, query: Query) -> Callable[[MessageLibrary], Answer]:
        """Answer function for one query; schemes may precompute here so that
        answering many libraries is cheap."""
        return lambda library: self.answer(query, library)

    def decoder(self, user: int, theta: tuple[int, ...], realization: Any,
                queries: Sequence[Query]) -> Callable[[Sequence[Answer], BitVector], BitVector]:
        """Decoding function of ``user`` for one realization, applied to (answers, cache)."""
        return lambda answers, cache: self.decode(user, theta, realization, queries, answers, cache)

    def answer_length(self, query: Query) -> int:
        zero = MessageLibrary.zeros(self.params.K, self.params.L)
        return self.answer(query, zero).bits.length

    def query(self, theta: tuple[int, ...], realization: Any, db: int) -> Query:
        """The query sent to ``db`` alone."""
        return self.queries(theta, realization)[db - 1]

    def query_key(self, theta: tuple[int, ...], realization: Any, db: int) -> bytes:
        """Audit key of the query sent to ``db``; schemes may override with a
        faster path that must return identical bytes."""
        return canonical_query_bytes(self.query(theta, realization, db))

    def describe(self) -> dict:
        return {"scheme": self.name, **self.params.to_json()}


# --- transcripts --------------------------------------------------------------------

@dataclass
class Transcript:
    params: SystemParams
    demand: tuple[int, ...]
    seed: int | None
    caches: list[CacheContent]
    queries: list[Query]
    answers: list[Answer]
    decoded: list[BitVector]
    download_bits: int
    load: Fraction
    scheme: str = ""
    correct: bool | None = field(default=None, compare=False)

    def to_json(self) -> dict:
        return {
            "params": self.params.to_json(),
            "demand": list(self.demand),
            "seed": self.seed,
            "caches": [c.to_json() for c in self.caches],
            "queries": [{"db": q.db, "payload": q.payload} for q in self.queries],
            "answers": [{"db": a.db, "bits": a.bits.to_json()} for a in self.answers],
            "decoded": [d.to_json() for d in self.decoded],
            "download_bits": self.download_bits,
            "load": frac_str(self.load),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":")) + "\n"


def execute(scheme: Scheme, library: MessageLibrary, theta: Sequence[int], realization: Any,
            seed: int | None = None, caches: list[CacheContent] | None = None) -> Transcript:
    """Run one protocol instance for a fixed randomness realization."""
    theta = scheme.check_demand(theta)
    scheme.check_library(library)
    if caches is None:
        caches = scheme.place(library)
    queries = scheme.queries(theta, realization)
    answers = [scheme.answer(q, library) for q in queries]
    decoded = [scheme.decode(u, theta, realization, queries, answers, caches[u - 1].stored_bits)
               for u in range(1, scheme.params.Ku + 1)]
    download = sum(a.bits.length for a in answers)
    t = Transcript(scheme.params, theta, seed, caches, queries, answers, decoded, download,
                   Fraction(download, scheme.params.L), scheme.name)
    t.correct = all(decoded[u - 1] == library.message(theta[u - 1]) for u in range(1, len(theta) + 1))
    return t


def run_transcript(scheme: Scheme, library: MessageLibrary, demand: Sequence[int], seed: int) -> Transcript:
    theta = scheme.check_demand(demand)
    rng = np.random.default_rng(seed)
    realization = scheme.sample(theta, rng)
    return execute(scheme, library, theta, realization, seed=seed)


def place(scheme: Scheme, library: MessageLibrary) -> list[CacheContent]:
    scheme.check_library(library)
    caches = scheme.place(library)
    for c in caches:
        if c.stored_bits.length != scheme.params.cache_bits:
            raise ParamMismatch(f"user {c.user} caches {c.stored_bits.length} bits, budget is "
                                f"{scheme.params.cache_bits}")
    return caches


def uniform(items: Iterable[Any]) -> Iterator[tuple[Any, Fraction]]:
    items = list(items)
    p = Fraction(1, len(items))
    for x in items:
        yield x, p


# --- composition --------------------------------------------------------------------

class Concatenated(Scheme):
    """Runs ``blocks`` independent copies of each part scheme on consecutive
    message segments: ``parts = [(scheme, blocks), ...]``.

    Memory sharing is a two-part instance; block repetition a one-part one.
    Each block draws its own randomness.
    """

    name = "concat"

    def __init__(self, parts: Sequence[tuple[Scheme, int]]):
        parts = [(s, int(b)) for s, b in parts if b > 0]
        if not parts:
            raise InvalidParameter("need at least one block")
        first = parts[0][0].params
        for s, _ in parts:
            if (s.params.K, s.params.Ku, s.params.N) != (first.K, first.Ku, first.N):
                raise ParamMismatch("all parts must share K, Ku and N")
        self.parts = parts
        self.blocks: list[tuple[Scheme, int, int]] = []  # (scheme, message offset, cache offset)
        off = coff = 0
        for s, b in parts:
            for _ in range(b):
                self.blocks.append((s, off, coff))
                off += s.params.L
                coff += s.params.cache_bits
        self.params = SystemParams(K=first.K, Ku=first.Ku, N=first.N, L=off, M=Fraction(coff, off))

    def demand_set(self):
        sets = [set(s.demand_set()) for s, _ in self.parts]
        common = set.intersection(*sets)
        return [d for d in self.parts[0][0].demand_set() if d in common]

    def place(self, library):
        self.check_library(library)
        out = []
        for u in range(1, self.params.Ku + 1):
            bits, descs = BitVector(0), []
            for s, off, _ in self.blocks:
                c = s.place(library.segment(off, off + s.params.L))[u - 1]
                bits = bits.concat(c.stored_bits)
                descs.append(c.description.shifted(off))
            out.append(CacheContent(u, bits, merge_descriptions(descs)))
        return out

    def sample(self, theta, rng):
        return tuple(s.sample(theta, rng) for s, _, _ in self.blocks)

    def domain_size(self, theta):
        total = 1
        for s, _, _ in self.blocks:
            n = s.domain_size(theta)
            if n is None:
                return None
            total *= n
        return total

    def realizations(self, theta):
        lists = [list(s.realizations(theta)) for s, _, _ in self.blocks]
        for combo in itertools.product(*lists):
            p = Fraction(1)
            for _, q in combo:
                p *= q
            yield tuple(r for r, _ in combo), p

    def queries(self, theta, realization):
        per_block = [s.queries(theta, r) for (s, _, _), r in zip(self.blocks, realization)]
        return [Query(n, {"scheme": "concat", "db": n, "blocks": [qs[n - 1].payload for qs in per_block]})
                for n in range(1, self.params.N + 1)]

    def answer(self, query, library):
        self.check_library(library)
        bits = BitVector(0)
        for (s, off, _), payload in zip(self.blocks, query.payload["blocks"]):
            bits = bits.concat(s.answer(Query(query.db, payload), library.segment(off, off + s.params.L)).bits)
        return Answer(query.db, bits)

    def decode(self, user, theta, realization, queries, answers, cache):
        out = BitVector(0)
        pos = [0] * len(answers)
        for i, ((s, _, coff), r) in enumerate(zip(self.blocks, realization)):
            sub_q = [Query(q.db, q.payload["blocks"][i]) for q in queries]
            sub_a = []
            for n, (q, a) in enumerate(zip(sub_q, answers)):
                width = s.answer_length(q)
                sub_a.append(Answer(a.db, a.bits.slice(pos[n], pos[n] + width)))
                pos[n] += width
            sub_cache = cache.slice(coff, coff + s.params.cache_bits)
            out = out.concat(s.decode(user, theta, r, sub_q, sub_a, sub_cache))
        return out

    def describe(self):
        return {**super().describe(), "parts": [[s.describe(), b] for s, b in self.parts]}


def repeat_blocks(scheme: Scheme, times: int) -> Scheme:
    """Serve ``times * L`` bit messages by independent repetitions of ``scheme``."""
    if times < 1:
        raise InvalidParameter("times must be >= 1")
    return scheme if times == 1 else Concatenated([(scheme, times)])
