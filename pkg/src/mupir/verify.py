"""Acceptance suite shared by ``mupir verify-all`` and the test-suite.

Each check returns a deterministic ``CheckResult`` (no timings inside), so the
report written by ``verify-all`` is byte-stable for a fixed master seed.
Wall-clock time is measured separately by ``run_all``.
"""
from __future__ import annotations

import json
import math
import time
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import bounds
from .audit import (audit_privacy, exact_query_distribution, measure_load, random_libraries,
                    realization_loads, verify_correctness)
from .cia import Cia1Scheme, Cia2Scheme
from .distinct import dd_corner1, dd_corner2
from .product import ProductDesign, pd_load_formula
from .sjpir import SjScheme, sj_download_per_db, sj_rate
from .system import MessageLibrary, frac_str, run_transcript

F = Fraction


@dataclass
class CheckResult:
    number: int
    title: str
    passed: bool
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"criterion": self.number, "title": self.title,
                "verdict": "pass" if self.passed else "fail", "details": self.details}


@dataclass
class Timed:
    result: CheckResult
    seconds: float
    limit: float | None

    @property
    def in_time(self) -> bool:
        return self.limit is None or self.seconds < self.limit

    @property
    def passed(self) -> bool:
        return self.result.passed and self.in_time


def _rng(seed: int, number: int) -> np.random.Generator:
    return np.random.default_rng([seed, number])


# --- 1, 2: CIA loads ----------------------------------------------------------------

def _cia_loads(number: int, title: str, make, expected) -> CheckResult:
    details, ok = {}, True
    for N in (2, 3, 4, 5):
        scheme = make(N)
        loads = set()
        for theta in scheme.demand_set():
            loads |= realization_loads(scheme, theta)
        details[f"N={N}"] = sorted(frac_str(x) for x in loads)
        ok &= loads == {expected(N)}
    return CheckResult(number, title, ok, details)


def check_cia1_load(seed: int = 0) -> CheckResult:
    return _cia_loads(1, "CIA corner 1 load (N+1)/N", Cia1Scheme, lambda N: F(N + 1, N))


def check_cia2_load(seed: int = 0) -> CheckResult:
    return _cia_loads(2, "CIA corner 2 load (N+1)/(2N-1)", Cia2Scheme, lambda N: F(N + 1, 2 * N - 1))


# --- 3, 4: CIA decodability and privacy ---------------------------------------------

def check_cia_decoding(seed: int = 0) -> CheckResult:
    rng = _rng(seed, 3)
    details, ok = {}, True
    for make in (Cia1Scheme, Cia2Scheme):
        for N in (2, 3):
            scheme = make(N)
            libs = random_libraries(2, scheme.params.L, 100, rng)
            rep = verify_correctness(scheme, libs, randomness="exhaustive")
            per_theta = scheme.domain_size((1, 2))
            details[f"{scheme.name} N={N}"] = {"realizations_per_theta": per_theta, "runs": rep.runs,
                                               "failures": rep.failures}
            ok &= rep.passed and per_theta == {2: 16, 3: 324}[N]
    return CheckResult(3, "CIA decodability, exhaustive randomness", ok, details)


def check_cia_privacy(seed: int = 0) -> CheckResult:
    details, ok = {}, True
    for make in (Cia1Scheme, Cia2Scheme):
        for N in (2, 3):
            scheme = make(N)
            for db in range(1, N + 1):
                rep = audit_privacy(scheme, db, mode="exhaustive")
                details[f"{scheme.name} N={N} db={db}"] = frac_str(rep.distance)
                ok &= rep.passed and rep.distance == 0
    return CheckResult(4, "CIA exact per-DB privacy", ok, details)


# --- 5: single-user engine ----------------------------------------------------------

def check_sj_engine(seed: int = 0) -> CheckResult:
    rng = _rng(seed, 5)
    details, ok = {}, True
    for K in (1, 2, 3, 4):
        for N in (2, 3):
            scheme = SjScheme(K, N)
            formula = sum(math.comb(K, k) * (N - 1) ** (k - 1) for k in range(1, K + 1))
            rate = sum((F(1, N ** i) for i in range(K)), F(0))
            per_db, loads, failures = set(), set(), 0
            libs = random_libraries(K, scheme.params.L, 100, rng)
            for i, lib in enumerate(libs):
                theta = (int(rng.integers(K)) + 1,)
                t = run_transcript(scheme, lib, theta, seed=int(rng.integers(2 ** 31)))
                per_db |= {a.bits.length for a in t.answers}
                loads.add(t.load)
                failures += not t.correct
            good = (per_db == {formula} and sj_download_per_db(K, N) == formula and loads == {rate}
                    and sj_rate(K, N) == rate and failures == 0)
            details[f"K={K} N={N}"] = {"per_db": sorted(per_db), "rate": sorted(frac_str(x) for x in loads),
                                       "failures": failures}
            ok &= good
    scheme = SjScheme(2, 2)
    for db in (1, 2):
        rep = audit_privacy(scheme, db, mode="exhaustive")
        details[f"privacy K=2 N=2 db={db}"] = {"distance": frac_str(rep.distance),
                                               "realizations": scheme.domain_size((1,))}
        ok &= rep.passed and scheme.domain_size((1,)) == 576
    return CheckResult(5, "single-user PIR engine", ok, details)


# --- 6: product design --------------------------------------------------------------

def check_product_design(seed: int = 0) -> CheckResult:
    rng = _rng(seed, 6)
    details, ok = {}, True
    for K in (2, 3):
        for Ku in (2, 3):
            for N in (2, 3):
                for t in range(1, Ku):
                    p = ProductDesign(K, Ku, N, t)
                    expected = F(Ku - t, t + 1) * sj_rate(K, N)
                    lib = MessageLibrary.random(K, p.params.L, rng)
                    loads = measure_load(p, lib, seed=int(rng.integers(2 ** 31)))
                    libs = random_libraries(K, p.params.L, 20, rng)
                    rep = verify_correctness(p, libs, randomness=2, seed=int(rng.integers(2 ** 31)))
                    structural = _structures(p, rng)
                    good = (set(loads.loads.values()) == {expected} and pd_load_formula(K, Ku, N, t) == expected
                            and len(loads.loads) == K ** Ku and rep.passed and structural)
                    details[f"K={K} Ku={Ku} N={N} t={t}"] = {
                        "load": sorted(frac_str(x) for x in set(loads.loads.values())),
                        "demands": len(loads.loads), "runs": rep.runs, "failures": rep.failures,
                        "structure_identical": structural}
                    ok &= good
    p = ProductDesign(2, 2, 2, 1)
    for db in (1, 2):
        rep = audit_privacy(p, db, mode="exhaustive")
        details[f"privacy K=Ku=N=2 t=1 db={db}"] = frac_str(rep.distance)
        ok &= rep.passed
    return CheckResult(6, "product design", ok, details)


def _structures(p: ProductDesign, rng: np.random.Generator) -> bool:
    """The θ-independent projection of every DB query is identical across demands."""
    seen = defaultdict(set)
    for theta in p.demand_set():
        r = p.sample(theta, rng)
        for q in p.queries(theta, r):
            seen[q.db].add(p.structure(q))
    return all(len(v) == 1 for v in seen.values())


# --- 7: distinct demands ------------------------------------------------------------

def check_distinct(seed: int = 0) -> CheckResult:
    libs = [MessageLibrary.from_bits([[(x >> j) & 1 for j in range(3)], [(x >> (3 + j)) & 1 for j in range(3)]])
            for x in range(64)]
    details, ok = {}, True
    for scheme, load in ((dd_corner1(), F(4, 3)), (dd_corner2(), F(1))):
        rep = verify_correctness(scheme, libs, randomness="exhaustive")
        loads = set()
        uniform = True
        for theta in scheme.demand_set():
            loads |= realization_loads(scheme, theta)
            for db in (1, 2):
                dist = exact_query_distribution(scheme, theta, db)
                uniform &= sorted(dist.values()) == [F(1, 2), F(1, 2)]
        details[scheme.name] = {"runs": rep.runs, "failures": rep.failures,
                                "load": sorted(frac_str(x) for x in loads), "variants_uniform": uniform}
        ok &= rep.passed and rep.runs == 2 * 2 * 64 and loads == {load} and uniform
    return CheckResult(7, "distinct-demand corners", ok, details)


# --- 8: formula coincidences --------------------------------------------------------

def _continuous(f: Callable, points, eps=F(1, 10 ** 9)) -> bool:
    # piecewise linear with slopes below 10: a jump would exceed 10 * eps
    return all(abs(f(b) - f(b - eps)) <= 10 * eps and abs(f(b + eps) - f(b)) <= 10 * eps for b in points)


def check_formulas(seed: int = 0) -> CheckResult:
    details, ok = {}, True
    for N in (2, 3, 4, 5):
        lo = F(2 * (N - 1), 2 * N - 1)
        pts = bounds.grid(0, 2, 200, extra=[lo])
        same = all(bounds.cia_load(M, N) == bounds.single_user_pir_bound(2, N, M) for M in pts if M >= lo)
        cont = (_continuous(lambda M: bounds.cia_load(M, N), [F(N - 1, 2 * N), lo])
                and _continuous(lambda M: bounds.uncoded_optimal_load(M, N), [lo]))
        details[f"N={N}"] = {"cia_equals_pir_bound": same, "continuous": cont}
        ok &= same and cont
    cont = _continuous(bounds.distinct_optimal_load, [F(1, 3), F(2, 3)])
    details["distinct"] = {"continuous": cont}
    ok &= cont
    return CheckResult(8, "formula coincidences and continuity", ok, details)


# --- 9: gap -------------------------------------------------------------------------

def check_gap(seed: int = 0) -> CheckResult:
    worst, where = F(0), None
    for K in range(2, 7):
        for Ku in range(2, 7):
            for N in (2, 3):
                for M in bounds.grid(0, K, 200):
                    g = bounds.gap_ratio(K, Ku, N, M)
                    if g > worst:
                        worst, where = g, {"K": K, "Ku": Ku, "N": N, "M": frac_str(M)}
    return CheckResult(9, "gap to a quarter of the caching bound", worst <= 8,
                       {"max_ratio": frac_str(worst), "at": where})


# --- 10: memory sharing -------------------------------------------------------------

def check_memory_sharing(seed: int = 0) -> CheckResult:
    rng = _rng(seed, 10)
    a, b = Cia1Scheme(2), Cia2Scheme(2)
    mixed = bounds.memory_share(a, b, F(1, 2))
    lib = MessageLibrary.random(2, mixed.params.L, rng)
    loads = measure_load(mixed, lib, seed=int(rng.integers(2 ** 31)))
    libs = random_libraries(2, mixed.params.L, 10, rng)
    rep = verify_correctness(mixed, libs, randomness=20, seed=int(rng.integers(2 ** 31)))
    endpoints = True
    for lam, ref in ((F(1), a), (F(0), b)):
        s = bounds.memory_share(a, b, lam)
        elib = MessageLibrary.random(2, ref.params.L, rng)
        tseed = int(rng.integers(2 ** 31))
        for theta in ref.demand_set():
            endpoints &= run_transcript(s, elib, theta, tseed).dumps() == run_transcript(ref, elib, theta, tseed).dumps()
    details = {"M": frac_str(mixed.params.M), "L": mixed.params.L,
               "load": sorted(frac_str(x) for x in set(loads.loads.values())),
               "runs": rep.runs, "failures": rep.failures, "endpoints_identical": endpoints}
    ok = (mixed.params.M == F(11, 24) and set(loads.loads.values()) == {F(5, 4)} and rep.passed and endpoints)
    return CheckResult(10, "memory sharing between CIA corners", ok, details)


CHECKS: list[tuple[int, Callable[[int], CheckResult], float]] = [
    (1, check_cia1_load, 1.0),
    (2, check_cia2_load, 1.0),
    (3, check_cia_decoding, 10.0),
    (4, check_cia_privacy, 30.0),
    (5, check_sj_engine, 60.0),
    (6, check_product_design, 300.0),
    (7, check_distinct, 5.0),
    (8, check_formulas, 1.0),
    (9, check_gap, 5.0),
    (10, check_memory_sharing, 5.0),
]


def run_check(number: int, seed: int = 0) -> Timed:
    for n, fn, limit in CHECKS:
        if n == number:
            start = time.perf_counter()
            result = fn(seed)
            return Timed(result, time.perf_counter() - start, limit)
    raise KeyError(number)


def run_all(seed: int = 0, only: list[int] | None = None) -> list[Timed]:
    return [run_check(n, seed) for n, _, _ in CHECKS if only is None or n in only]


def report_json(results: list[Timed], seed: int) -> str:
    """Deterministic report: verdicts and details only, no timings."""
    body = {"seed": seed, "criteria": [t.result.to_json() for t in results]}
    return json.dumps(body, indent=2, sort_keys=True) + "\n"


def matrix_lines(results: list[Timed]) -> list[str]:
    out = []
    for t in results:
        r = t.result
        limit = f"< {t.limit:g}s" if t.limit is not None else ""
        verdict = "PASS" if t.passed else "FAIL"
        note = "" if t.in_time else " (over time limit)"
        out.append(f"[{verdict}] {r.number:2d}. {r.title}: {t.seconds:.2f}s {limit}{note}")
    return out
