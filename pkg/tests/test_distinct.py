from __future__ import annotations

import itertools
from collections import Counter
from fractions import Fraction

import pytest

from mupir.audit import audit_privacy
from mupir.distinct import DISTINCT_DEMANDS, dd_corner1, dd_corner2, pairing
from mupir.errors import InvalidDemand
from mupir.system import MessageLibrary, execute, run_transcript

ALL_LIBRARIES = [MessageLibrary.from_bits([bits[:3], bits[3:]]) for bits in itertools.product((0, 1), repeat=6)]
SCHEMES = [(dd_corner1, Fraction(4, 3), 4), (dd_corner2, Fraction(1), 3)]


def _observation(t, user):
    return (t.caches[user - 1].stored_bits, tuple(a.bits for a in t.answers))


@pytest.mark.parametrize("make,load,bits", SCHEMES)
def test_brute_force_decodability(make, load, bits):
    """[DERIVED] every library consistent with a user's view has the same demanded message."""
    s = make()
    for theta, coin in itertools.product(DISTINCT_DEMANDS, (0, 1)):
        runs = [execute(s, lib, theta, coin) for lib in ALL_LIBRARIES]
        for u in (1, 2):
            implied = {}
            for lib, t in zip(ALL_LIBRARIES, runs):
                implied.setdefault(_observation(t, u), set()).add(lib.message(theta[u - 1]))
            assert all(len(v) == 1 for v in implied.values())
        assert all(t.correct and t.download_bits == bits and t.load == load for t in runs)


@pytest.mark.parametrize("make", [dd_corner1, dd_corner2])
def test_variant_marginals_are_uniform(make):
    """[PAPER] each DB sees each variant with probability 1/2 under both demands."""
    s = make()
    for db in (1, 2):
        for theta in DISTINCT_DEMANDS:
            c = Counter(s.queries(theta, coin)[db - 1].payload["variant"] for coin in (0, 1))
            assert c == {1: 1, 2: 1}
        assert audit_privacy(s, db).distance == 0


def test_pairing_table():
    """[PAPER] coin picks DB 1's variant; DB 2 follows or flips with the demand."""
    assert pairing(0, (1, 2)) == (1, 1)
    assert pairing(1, (1, 2)) == (2, 2)
    assert pairing(0, (2, 1)) == (1, 2)
    assert pairing(1, (2, 1)) == (2, 1)


def test_corner2_hand_elimination():
    """[DERIVED] theta=(1,2), variants (1,1): A_3 = A_{1,1} - B_1 - (B_2 + B_3)."""
    s = dd_corner2()
    lib = MessageLibrary.from_bits([[1, 0, 1], [0, 1, 1]])
    t = execute(s, lib, (1, 2), 0)
    a11 = t.answers[0].bits.bits()[0]
    b1 = t.caches[0].stored_bits.bits()[1]
    b2b3 = t.answers[1].bits.bits()[1]
    assert a11 ^ b1 ^ b2b3 == 1
    assert t.decoded[0] == lib.message(1)


def test_zero_library():
    s = dd_corner2()
    t = execute(s, MessageLibrary.zeros(2, 3), (2, 1), 1)
    assert all(a.bits.value == 0 for a in t.answers) and all(d.value == 0 for d in t.decoded)


@pytest.mark.parametrize("theta", [(1, 1), (2, 2), (1, 3)])
def test_equal_or_invalid_demands_rejected(theta):
    with pytest.raises(InvalidDemand):
        run_transcript(dd_corner1(), ALL_LIBRARIES[0], theta, 0)


def test_memory_budget():
    assert dd_corner1().params.M == Fraction(1, 3) and dd_corner1().params.cache_bits == 1
    assert dd_corner2().params.M == Fraction(2, 3) and dd_corner2().params.cache_bits == 2
