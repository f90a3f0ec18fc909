from __future__ import annotations

import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mupir.cia import Cia1Scheme, Cia2Scheme
from mupir.errors import InvalidDemand, InvalidParameter, ParamMismatch
from mupir.gf2 import BitMatrix
from mupir.system import (Concatenated, LinearCombos, MessageLibrary, Query, SystemParams, UncodedIndices,
                          canonical_query_bytes, execute, frac_str, merge_descriptions, parse_query, place,
                          repeat_blocks, run_transcript, validate_demand)


def test_system_params_validation():
    p = SystemParams(K=2, Ku=2, N=2, L=4, M=Fraction(1, 4))
    assert p.cache_bits == 1
    assert p.to_json() == {"K": 2, "Ku": 2, "N": 2, "L": 4, "M": "1/4"}
    with pytest.raises(InvalidParameter):
        SystemParams(K=2, Ku=2, N=2, L=4, M=Fraction(3))
    with pytest.raises(InvalidParameter):
        SystemParams(K=2, Ku=2, N=2, L=3, M=Fraction(1, 4))
    with pytest.raises(InvalidParameter):
        SystemParams(K=0, Ku=2, N=2, L=4, M=0)


def test_frac_str_always_has_denominator():
    assert frac_str(Fraction(0)) == "0/1"
    assert frac_str(Fraction(6, 4)) == "3/2"


def test_library_access(rng):
    lib = MessageLibrary.from_bits([[1, 0, 1], [0, 0, 1]])
    assert lib.K == 2 and lib.L == 3
    assert lib.message(1).bits() == (1, 0, 1)
    assert lib.bit(2, 2) == 1
    assert lib.segment(1, 3).message(1).bits() == (0, 1)
    r = MessageLibrary.random(3, 7, rng)
    assert r.K == 3 and all(w.length == 7 for w in r.messages)
    with pytest.raises(ParamMismatch):
        MessageLibrary.from_bits([[1, 0], [1]])


def test_validate_demand():
    assert validate_demand([1, 2], 2, 2) == (1, 2)
    with pytest.raises(InvalidDemand):
        validate_demand([1], 2, 2)
    with pytest.raises(InvalidDemand):
        validate_demand([0, 1], 2, 2)
    with pytest.raises(InvalidDemand):
        validate_demand([3, 1], 2, 2)


def test_cache_descriptions_evaluate():
    lib = MessageLibrary.from_bits([[1, 0, 1, 1], [0, 1, 1, 0]])
    unc = UncodedIndices(((1, 0), (2, 1), (2, 3)))
    assert unc.evaluate(lib).bits() == (1, 1, 0)
    lin = LinearCombos(((1, 2), (2, 2), (1, 3)), BitMatrix.from_rows([[1, 1, 0], [1, 1, 1]]))
    # 1+1 = 0 and 1+1+1 = 1
    assert lin.evaluate(lib).bits() == (0, 1)
    merged = merge_descriptions([unc, lin.shifted(0)])
    assert merged.evaluate(lib).bits() == (1, 1, 0, 0, 1)
    assert unc.as_linear().evaluate(lib) == unc.evaluate(lib)


def test_query_bytes_roundtrip():
    q = Query(2, {"scheme": "x", "db": 2, "vectors": [[0, 1], [1, 1]]})
    raw = canonical_query_bytes(q)
    assert json.loads(raw) == {"db": 2, "payload": q.payload}
    assert parse_query(raw) == q
    assert hash(Query(2, {"db": 2, "scheme": "x", "vectors": [[0, 1], [1, 1]]})) == hash(q)


def test_transcript_fields_and_determinism():
    scheme = Cia1Scheme(2)
    lib = MessageLibrary.random(2, 4, np.random.default_rng(1))
    t = run_transcript(scheme, lib, (1, 2), seed=7)
    assert list(t.to_json()) == ["params", "demand", "seed", "caches", "queries", "answers", "decoded",
                                 "download_bits", "load"]
    assert t.correct and t.load == Fraction(3, 2)
    assert t.dumps() == run_transcript(scheme, lib, (1, 2), seed=7).dumps()


def test_place_checks_budget():
    scheme = Cia2Scheme(3)
    lib = MessageLibrary.random(2, 5, np.random.default_rng(0))
    caches = place(scheme, lib)
    assert [c.stored_bits.length for c in caches] == [4, 4]
    with pytest.raises(ParamMismatch):
        place(scheme, MessageLibrary.random(2, 4, np.random.default_rng(0)))


@given(st.integers(1, 3), st.integers(0, 2 ** 31 - 1), st.sampled_from([(1, 1), (1, 2), (2, 1), (2, 2)]))
def test_block_repetition_decodes(times, seed, theta):
    scheme = repeat_blocks(Cia2Scheme(2), times)
    assert scheme.params.L == 3 * times and scheme.params.M == Fraction(2, 3)
    lib = MessageLibrary.random(2, scheme.params.L, np.random.default_rng(seed))
    t = run_transcript(scheme, lib, theta, seed)
    assert t.correct and t.load == 1


def test_concatenation_composes_params_and_randomness():
    c = Concatenated([(Cia1Scheme(2), 1), (Cia2Scheme(2), 2)])
    assert c.params.L == 4 + 6
    assert c.params.M == Fraction(1 + 4, 10)
    assert c.domain_size((1, 2)) == 16 ** 3
    lib = MessageLibrary.random(2, 10, np.random.default_rng(3))
    r = c.sample((2, 1), np.random.default_rng(4))
    assert execute(c, lib, (2, 1), r).correct
    with pytest.raises(ParamMismatch):
        Concatenated([(Cia1Scheme(2), 1), (Cia1Scheme(3), 1)])
