"""Verification harness: decodability, per-database query privacy, and load.

Privacy is audited on the query each database receives.  Answers are a
deterministic function of (query, library) and no shipped scheme lets its
queries depend on message contents, so equal per-database query distributions
across demands imply that a database learns nothing about the demand vector.
"""
from __future__ import annotations

import itertools
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DecodeFailure, InvalidParameter, MupirError, NotEnumerable
from .gf2 import BitVector
from .system import (Answer, CacheContent, MessageLibrary, Query, Scheme, SystemParams, Transcript,
                     UncodedIndices, execute, frac_str)

DEFAULT_THRESHOLD = 0.02
DEFAULT_MIN_SAMPLES = 100_000


# --- correctness --------------------------------------------------------------------

@dataclass
class CorrectnessReport:
    scheme: str
    runs: int = 0
    failures: int = 0
    counterexample: Transcript | None = None
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.runs > 0 and self.failures == 0

    def to_json(self) -> dict:
        return {"scheme": self.scheme, "runs": self.runs, "failures": self.failures,
                "verdict": "pass" if self.passed else "fail",
                "counterexample": self.counterexample.to_json() if self.counterexample else None,
                "error": self.error}


def random_libraries(K: int, L: int, count: int, rng: np.random.Generator) -> list[MessageLibrary]:
    return [MessageLibrary.random(K, L, rng) for _ in range(count)]


def _realization_list(scheme: Scheme, theta, randomness, rng, cap: int):
    if randomness == "exhaustive":
        size = scheme.domain_size(theta)
        if size is None or size > cap:
            raise NotEnumerable(f"{scheme.name} has {size} realizations for {theta}; "
                                f"exhaustive mode is capped at {cap}; pass a sample count instead")
        return [r for r, _ in scheme.realizations(theta)]
    return [scheme.sample(theta, rng) for _ in range(int(randomness))]


def verify_correctness(scheme: Scheme, libraries: Sequence[MessageLibrary],
                       demand_set: Sequence[Sequence[int]] | None = None,
                       randomness: str | int = "exhaustive", seed: int = 0,
                       max_realizations: int = 1_000_000) -> CorrectnessReport:
    """Run every (demand, realization, library) combination and check that each
    user decodes exactly its demanded message.

    ``randomness`` is ``"exhaustive"`` or a number of sampled realizations per
    demand.  The first failure is kept as a full transcript.
    """
    rng = np.random.default_rng(seed)
    report = CorrectnessReport(scheme.name)
    demands = [scheme.check_demand(d) for d in (demand_set or scheme.demand_set())]
    for lib in libraries:
        scheme.check_library(lib)
    cache_bits = [[c.stored_bits for c in scheme.place(lib)] for lib in libraries]
    wanted = [{theta: [lib.messages[k - 1].value for k in theta] for theta in demands} for lib in libraries]
    users = range(1, scheme.params.Ku + 1)
    # answers are a function of the query alone; schemes that return the same
    # answerer for equal queries get each answer computed once per library
    answer_table: dict = {}

    def column(f):
        if f not in answer_table:
            answer_table[f] = [f(lib) for lib in libraries]
        return answer_table[f]

    for theta in demands:
        for r in _realization_list(scheme, theta, randomness, rng, max_realizations):
            queries = scheme.queries(theta, r)
            try:
                answerers = [scheme.answerer(q) for q in queries]
                decoders = [scheme.decoder(u, theta, r, queries) for u in users]
            except DecodeFailure as e:
                report.runs += len(libraries)
                report.failures += len(libraries)
                _keep(report, scheme, libraries[0], theta, r, str(e))
                continue
            cols = [column(f) for f in answerers]
            for i, (lib, stored, targets) in enumerate(zip(libraries, cache_bits, wanted)):
                report.runs += 1
                answers = [c[i] for c in cols]
                try:
                    ok = all(dec(answers, c).value == w for dec, c, w in zip(decoders, stored, targets[theta]))
                    err = None if ok else "decoded message differs from the library"
                except DecodeFailure as e:
                    ok, err = False, str(e)
                if not ok:
                    report.failures += 1
                    _keep(report, scheme, lib, theta, r, err)
    return report


def _keep(report: CorrectnessReport, scheme: Scheme, lib, theta, r, err) -> None:
    if report.counterexample is not None:
        return
    report.error = err
    try:
        report.counterexample = execute(scheme, lib, theta, r)
    except MupirError:
        report.counterexample = None


# --- privacy ------------------------------------------------------------------------

@dataclass
class PrivacyReport:
    scheme: str
    db: int
    mode: str
    distance: Fraction | float
    passed: bool
    per_theta: dict = field(default_factory=dict)
    samples: int | None = None
    counterexample: Transcript | None = None

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_json(self) -> dict:
        d = frac_str(self.distance) if isinstance(self.distance, Fraction) else float(self.distance)
        return {"scheme": self.scheme, "db": self.db, "mode": self.mode, "distance": d,
                "verdict": self.verdict,
                "counterexample": self.counterexample.to_json() if self.counterexample else None}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":")) + "\n"


def tv_distance(p: dict, q: dict):
    keys = set(p) | set(q)
    zero = Fraction(0) if any(isinstance(v, Fraction) for v in itertools.chain(p.values(), q.values())) else 0.0
    return sum((abs(p.get(k, zero) - q.get(k, zero)) for k in keys), zero) / 2


def exact_query_distribution(scheme: Scheme, theta, db: int) -> dict[bytes, Fraction]:
    """Exact distribution of the canonical query bytes sent to ``db``."""
    by_prob: dict[Fraction, Counter] = defaultdict(Counter)
    for r, p in scheme.realizations(theta):
        by_prob[p][scheme.query_key(theta, r, db)] += 1
    dist: dict[bytes, Fraction] = defaultdict(Fraction)
    for p, counts in by_prob.items():
        for key, c in counts.items():
            dist[key] += p * c
    total = sum(dist.values(), Fraction(0))
    if total != 1:
        raise ArithmeticError(f"realization probabilities sum to {total}")
    return dict(dist)


def _check_db(scheme: Scheme, db: int) -> None:
    if not 1 <= db <= scheme.params.N:
        raise InvalidParameter(f"db {db} outside [1, {scheme.params.N}]")


def audit_privacy(scheme: Scheme, db: int, demand_set: Sequence[Sequence[int]] | None = None,
                  mode: str = "exhaustive", seed: int = 0, samples: int = DEFAULT_MIN_SAMPLES,
                  threshold: float = DEFAULT_THRESHOLD, min_samples: int = DEFAULT_MIN_SAMPLES,
                  max_realizations: int = 10_000_000) -> PrivacyReport:
    """Compare the query distribution at ``db`` across all demand vectors.

    exhaustive: exact rational distributions; pass iff every TV distance is 0.
    sampled: ``samples`` draws per demand; the statistic is the largest
    plug-in TV distance over per-feature marginals (symbol-index positions for
    PIR-style queries, payload leaves for the rest); pass iff it is below
    ``threshold`` and ``samples >= min_samples``.
    """
    _check_db(scheme, db)
    demands = [scheme.check_demand(d) for d in (demand_set or scheme.demand_set())]
    if mode == "exhaustive":
        sizes = [scheme.domain_size(theta) for theta in demands]
        if any(n is None for n in sizes):
            raise NotEnumerable(f"{scheme.name} has no enumerable randomness domain")
        if max(sizes) > max_realizations:
            raise NotEnumerable(f"{scheme.name} has {max(sizes)} realizations per demand; "
                                f"exhaustive mode is capped at {max_realizations}")
        dists = {theta: exact_query_distribution(scheme, theta, db) for theta in demands}
        ref = demands[0]
        worst, worst_theta = Fraction(0), None
        for theta in demands[1:]:
            d = tv_distance(dists[ref], dists[theta])
            if d > worst:
                worst, worst_theta = d, theta
        report = PrivacyReport(scheme.name, db, mode, worst, worst == 0, per_theta=dists)
        if worst_theta is not None:
            report.counterexample = _privacy_witness(scheme, db, ref, worst_theta, dists, seed)
        return report
    if mode != "sampled":
        raise InvalidParameter(f"unknown audit mode {mode!r}")
    rng = np.random.default_rng(seed)
    interner = _Interner()
    feats = {theta: _features(scheme, theta, db, samples, rng, interner) for theta in demands}
    feats = {theta: f if isinstance(f, np.ndarray) else _to_matrix(f, len(interner.paths))
             for theta, f in feats.items()}
    ref = demands[0]
    worst = 0.0
    for theta in demands[1:]:
        worst = max(worst, _max_marginal_tv(feats[ref], feats[theta]))
    passed = worst < threshold and samples >= min_samples
    return PrivacyReport(scheme.name, db, mode, worst, passed, samples=samples)


ENUMERATE_LIMIT = 1_000_000


def _leaves(obj, path=()):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _leaves(obj[k], path + (k,))
    elif isinstance(obj, (list, tuple)):
        yield path + ("#len",), len(obj)
        for i, x in enumerate(obj):
            yield from _leaves(x, path + (i,))
    else:
        yield path, obj


class _Interner:
    """Maps query payload leaves to integer feature columns and value codes,
    shared across demand vectors so columns line up."""

    def __init__(self):
        self.paths: dict = {}
        self.values: dict = {}

    def encode(self, query: Query) -> dict[int, int]:
        out = {}
        for path, v in _leaves({"db": query.db, "payload": query.payload}):
            col = self.paths.setdefault(path, len(self.paths))
            out[col] = self.values.setdefault(json.dumps(v), len(self.values))
        return out


def _to_matrix(rows: list[dict[int, int]], width: int) -> np.ndarray:
    out = np.full((len(rows), width), -1, dtype=np.int64)
    for i, row in enumerate(rows):
        for col, v in row.items():
            out[i, col] = v
    return out


def _features(scheme: Scheme, theta, db: int, samples: int, rng: np.random.Generator,
              interner: _Interner) -> list:
    """Per-sample feature rows: symbol indices when the scheme provides a
    vectorized sampler, otherwise one column per payload leaf."""
    if hasattr(scheme, "sample_features"):
        return np.asarray(scheme.sample_features(theta, db, samples, rng), dtype=np.int64)
    try:
        small = scheme.domain_size(theta) <= ENUMERATE_LIMIT
    except NotEnumerable:
        small = False
    if small:
        # drawing a realization index is the same draw as scheme.sample; each query is encoded once
        pairs = list(scheme.realizations(theta))
        probs = np.array([float(p) for _, p in pairs])
        picks = rng.choice(len(pairs), size=samples, p=probs / probs.sum())
        encoded = [interner.encode(scheme.queries(theta, r)[db - 1]) for r, _ in pairs]
        return [encoded[i] for i in picks.tolist()]
    return [interner.encode(scheme.queries(theta, scheme.sample(theta, rng))[db - 1]) for _ in range(samples)]


def _max_marginal_tv(a: np.ndarray, b: np.ndarray) -> float:
    """Largest plug-in TV distance between matching columns of two samples."""
    if a.shape[1] != b.shape[1]:
        return 1.0
    worst = 0.0
    for j in range(a.shape[1]):
        lo = min(a[:, j].min(), b[:, j].min())  # -1 marks an absent leaf
        width = max(a[:, j].max(), b[:, j].max()) - lo + 1
        pa = np.bincount(a[:, j] - lo, minlength=width) / a.shape[0]
        pb = np.bincount(b[:, j] - lo, minlength=width) / b.shape[0]
        worst = max(worst, 0.5 * float(np.abs(pa - pb).sum()))
    return worst


def _privacy_witness(scheme, db, ref, theta, dists, seed) -> Transcript | None:
    """Transcript for ``theta`` whose query at ``db`` is the most over-represented one."""
    p, q = dists[ref], dists[theta]
    key = max(set(p) | set(q), key=lambda k: abs(p.get(k, 0) - q.get(k, 0)))
    lib = MessageLibrary.random(scheme.params.K, scheme.params.L, np.random.default_rng(seed))
    for who in (theta, ref):
        for r, _ in scheme.realizations(who):
            if scheme.query_key(who, r, db) == key:
                return execute(scheme, lib, who, r)
    return None


# --- load ---------------------------------------------------------------------------

@dataclass
class LoadReport:
    scheme: str
    loads: dict[tuple[int, ...], Fraction]

    @property
    def uniform(self) -> bool:
        return len(set(self.loads.values())) == 1

    def to_json(self) -> dict:
        return {"scheme": self.scheme, "loads": {",".join(map(str, k)): frac_str(v) for k, v in self.loads.items()},
                "verdict": "pass" if self.uniform else "fail"}


def measure_load(scheme: Scheme, library: MessageLibrary, demand_set=None, seed: int = 0) -> LoadReport:
    rng = np.random.default_rng(seed)
    demands = [scheme.check_demand(d) for d in (demand_set or scheme.demand_set())]
    loads = {}
    for theta in demands:
        r = scheme.sample(theta, rng)
        answers = [scheme.answer(q, library) for q in scheme.queries(theta, r)]
        loads[theta] = Fraction(sum(a.bits.length for a in answers), scheme.params.L)
    return LoadReport(scheme.name, loads)


def realization_loads(scheme: Scheme, theta) -> set[Fraction]:
    """Every load the scheme can produce for ``theta`` over its whole randomness domain.

    Answer lengths are functions of the query alone, so when each database's
    answer length is constant over that database's query support, the load is
    the same for every realization.  Schemes exposing ``db_marginal`` let this
    run over per-database supports instead of the joint domain.
    """
    theta = scheme.check_demand(theta)
    L = scheme.params.L
    if hasattr(scheme, "db_marginal"):
        per_db = []
        for db in range(1, scheme.params.N + 1):
            per_db.append({scheme.answer_length(scheme.query(theta, r, db))
                           for r, _ in scheme.db_marginal(theta, db)})
        if all(len(s) == 1 for s in per_db):
            return {Fraction(sum(next(iter(s)) for s in per_db), L)}
    loads = set()
    for r, _ in scheme.realizations(theta):
        loads.add(Fraction(sum(scheme.answer_length(q) for q in scheme.queries(theta, r)), L))
    return loads


# --- fault injection ----------------------------------------------------------------

class StrawmanScheme(Scheme):
    """Non-private baseline: DB 1 is told the demand vector and returns the
    demanded messages (each distinct one once)."""

    name = "strawman"

    def __init__(self, K: int = 2, Ku: int = 2, N: int = 2, L: int = 4):
        self.params = SystemParams(K=K, Ku=Ku, N=N, L=L, M=Fraction(0))

    def place(self, library):
        self.check_library(library)
        return [CacheContent(u, BitVector(0), UncodedIndices(())) for u in range(1, self.params.Ku + 1)]

    def sample(self, theta, rng):
        return None

    def domain_size(self, theta):
        return 1

    def realizations(self, theta):
        yield None, Fraction(1)

    def queries(self, theta, realization):
        wanted = sorted(set(theta))
        return [Query(n, {"scheme": "strawman", "db": n, "messages": wanted if n == 1 else []})
                for n in range(1, self.params.N + 1)]

    def answer(self, query, library):
        bits = BitVector(0)
        for k in query.payload["messages"]:
            bits = bits.concat(library.message(k))
        return Answer(query.db, bits)

    def decode(self, user, theta, realization, queries, answers, cache):
        wanted = queries[0].payload["messages"]
        i = wanted.index(theta[user - 1])
        L = self.params.L
        return answers[0].bits.slice(i * L, (i + 1) * L)


class CorruptedScheme(Scheme):
    """Wraps a scheme and flips one answer bit of one database."""

    def __init__(self, inner: Scheme, db: int = 1, bit: int = 0):
        self.inner, self.db, self.bit = inner, db, bit
        self.params = inner.params
        self.name = f"corrupted-{inner.name}"

    def demand_set(self):
        return self.inner.demand_set()

    def place(self, library):
        return self.inner.place(library)

    def sample(self, theta, rng):
        return self.inner.sample(theta, rng)

    def domain_size(self, theta):
        return self.inner.domain_size(theta)

    def realizations(self, theta):
        return self.inner.realizations(theta)

    def queries(self, theta, realization):
        return self.inner.queries(theta, realization)

    def query_key(self, theta, realization, db):
        return self.inner.query_key(theta, realization, db)

    def answer(self, query, library):
        a = self.inner.answer(query, library)
        if query.db != self.db or a.bits.length == 0:
            return a
        return Answer(a.db, a.bits ^ BitVector.unit(a.bits.length, self.bit % a.bits.length))

    def decode(self, user, theta, realization, queries, answers, cache):
        return self.inner.decode(user, theta, realization, queries, answers, cache)
