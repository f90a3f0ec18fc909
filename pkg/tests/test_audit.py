from __future__ import annotations

import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mupir.audit import (CorruptedScheme, StrawmanScheme, audit_privacy, exact_query_distribution,
                         measure_load, random_libraries, realization_loads, tv_distance,
                         verify_correctness)
from mupir.cia import Cia1Scheme, Cia2Scheme
from mupir.distinct import dd_corner1, dd_corner2
from mupir.errors import InvalidParameter, NotEnumerable
from mupir.product import ProductDesign, naive_scheme
from mupir.sjpir import SjScheme
from mupir.system import MessageLibrary


@given(st.lists(st.integers(0, 20), min_size=1, max_size=6), st.lists(st.integers(0, 20), min_size=1, max_size=6))
def test_tv_distance_against_numpy(a, b):
    """[DERIVED] half the L1 distance of the normalized count vectors."""
    n = max(len(a), len(b))
    pa, pb = np.zeros(n), np.zeros(n)
    pa[:len(a)], pb[:len(b)] = a, b
    if pa.sum() == 0 or pb.sum() == 0:
        return
    pa, pb = pa / pa.sum(), pb / pb.sum()
    p = {i: Fraction(x).limit_denominator(10 ** 6) for i, x in enumerate(pa) if x}
    q = {i: Fraction(x).limit_denominator(10 ** 6) for i, x in enumerate(pb) if x}
    assert abs(float(tv_distance(p, q)) - 0.5 * np.abs(pa - pb).sum()) < 1e-5


def test_tv_distance_identities():
    assert tv_distance({1: Fraction(1)}, {2: Fraction(1)}) == 1
    assert tv_distance({1: Fraction(1, 2), 2: Fraction(1, 2)}, {1: Fraction(1, 2), 2: Fraction(1, 2)}) == 0


@pytest.mark.parametrize("scheme", [Cia1Scheme(2), Cia2Scheme(2), Cia1Scheme(3), dd_corner1(), dd_corner2(),
                                    SjScheme(2, 2)])
def test_exhaustive_correctness(scheme):
    libs = random_libraries(scheme.params.K, scheme.params.L, 5, np.random.default_rng(0))
    rep = verify_correctness(scheme, libs)
    assert rep.passed and rep.counterexample is None
    assert rep.runs == 5 * sum(scheme.domain_size(t) for t in scheme.demand_set())


def test_sampled_correctness_and_enumeration_cap():
    s = SjScheme(2, 3)
    libs = random_libraries(2, s.params.L, 3, np.random.default_rng(2))
    rep = verify_correctness(s, libs, randomness=7)
    assert rep.passed and rep.runs == 3 * 7 * len(s.demand_set())
    with pytest.raises(NotEnumerable):
        verify_correctness(s, libs)


def test_corrupted_scheme_is_caught():
    s = CorruptedScheme(Cia1Scheme(2), db=2, bit=1)
    rep = verify_correctness(s, random_libraries(2, 4, 3, np.random.default_rng(1)), randomness=4)
    assert not rep.passed and rep.failures > 0
    t = rep.counterexample
    assert t is not None and t.correct is False
    assert rep.to_json()["counterexample"]["demand"] == list(t.demand)


@pytest.mark.parametrize("scheme", [Cia1Scheme(2), Cia1Scheme(3), Cia2Scheme(2), Cia2Scheme(3),
                                    dd_corner1(), dd_corner2(), SjScheme(2, 2)])
def test_exact_privacy(scheme):
    for db in range(1, scheme.params.N + 1):
        rep = audit_privacy(scheme, db)
        assert rep.distance == 0 and rep.passed and rep.counterexample is None


def test_exact_distribution_sums_to_one():
    for theta in Cia2Scheme(3).demand_set()[:2]:
        d = exact_query_distribution(Cia2Scheme(3), theta, 2)
        assert sum(d.values()) == 1


def test_strawman_fails_every_audit():
    s = StrawmanScheme()
    rep = audit_privacy(s, 1)
    assert rep.distance == 1 and not rep.passed and rep.verdict == "fail"
    assert rep.counterexample is not None and rep.counterexample.correct
    lib = MessageLibrary.random(2, 4, np.random.default_rng(0))
    loads = measure_load(s, lib)
    assert not loads.uniform
    assert loads.loads[(1, 1)] == 1 and loads.loads[(1, 2)] == 2
    assert verify_correctness(s, [lib]).passed
    sampled = audit_privacy(s, 1, mode="sampled", samples=1000, min_samples=1000)
    assert sampled.distance == 1.0 and not sampled.passed


def test_report_json_shape():
    rep = audit_privacy(Cia1Scheme(3), 1)
    d = json.loads(rep.dumps())
    assert d == {"scheme": "cia1", "db": 1, "mode": "exhaustive", "distance": "0/1", "verdict": "pass",
                 "counterexample": None}
    d = json.loads(audit_privacy(StrawmanScheme(), 1).dumps())
    assert d["distance"] == "1/1" and set(d["counterexample"]) >= {"demand", "queries", "answers"}


def test_sampled_mode_pass_and_sample_floor():
    s = dd_corner1()
    rep = audit_privacy(s, 2, mode="sampled", seed=3)
    assert rep.passed and rep.samples == 100_000 and rep.distance < 0.02
    small = audit_privacy(s, 2, mode="sampled", samples=500, seed=3)
    assert not small.passed
    assert audit_privacy(s, 2, mode="sampled", samples=500, seed=3, min_samples=500, threshold=0.2).passed


def test_sampled_mode_on_structured_queries():
    s = SjScheme(2, 2)
    rep = audit_privacy(s, 1, mode="sampled", samples=20_000, min_samples=20_000, threshold=0.05, seed=1)
    assert rep.passed and isinstance(rep.distance, float)


def test_not_enumerable_and_bad_arguments():
    with pytest.raises(NotEnumerable):
        audit_privacy(ProductDesign(3, 3, 2, 1), 1)
    with pytest.raises(NotEnumerable):
        audit_privacy(Cia1Scheme(2), 1, max_realizations=10)
    with pytest.raises(InvalidParameter):
        audit_privacy(Cia1Scheme(2), 3)
    with pytest.raises(InvalidParameter):
        audit_privacy(Cia1Scheme(2), 1, mode="bogus")


def test_restricted_demand_set():
    rep = audit_privacy(StrawmanScheme(), 2, demand_set=[(1, 2), (2, 1)])
    assert rep.passed


@pytest.mark.parametrize("scheme,load", [
    (Cia1Scheme(2), Fraction(3, 2)), (Cia2Scheme(3), Fraction(4, 5)), (ProductDesign(2, 2, 2, 1), Fraction(3, 4)),
    (naive_scheme(2, 2, 2, 4, Fraction(1)), Fraction(1)), (dd_corner1(), Fraction(4, 3)),
])
def test_measure_load(scheme, load):
    lib = MessageLibrary.random(scheme.params.K, scheme.params.L, np.random.default_rng(5))
    rep = measure_load(scheme, lib)
    assert rep.uniform and set(rep.loads.values()) == {load}
    assert rep.to_json()["verdict"] == "pass"


@pytest.mark.parametrize("scheme,load", [(Cia1Scheme(3), Fraction(4, 3)), (Cia2Scheme(2), Fraction(1)),
                                         (SjScheme(2, 2), Fraction(3, 2))])
def test_realization_loads(scheme, load):
    for theta in scheme.demand_set():
        assert realization_loads(scheme, theta) == {load}
