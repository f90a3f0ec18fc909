from __future__ import annotations

import itertools
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mupir import bounds
from mupir.cia import Cia1Scheme, Cia2Scheme
from mupir.distinct import dd_corner1, dd_corner2
from mupir.errors import IndivisibleLength, InvalidParameter, OutOfRange
from mupir.product import NaiveScheme, ProductDesign
from mupir.system import Concatenated, MessageLibrary, run_transcript

fractions = st.fractions(min_value=0, max_value=1, max_denominator=50)


def envelope_oracle(points, M):
    """[DERIVED] lower convex envelope at M as the minimum over all chords that straddle M."""
    best = None
    for (m0, r0), (m1, r1) in itertools.product(points, repeat=2):
        if m0 <= M <= m1:
            v = r0 if m0 == m1 else r0 + (r1 - r0) * (M - m0) / (m1 - m0)
            best = v if best is None else min(best, v)
    return best


@pytest.mark.parametrize("M,N,R", [
    (F(1, 4), 2, F(3, 2)), (F(2, 3), 2, F(1)), (F(1, 3), 3, F(4, 3)),
    (0, 2, 2), (0, 5, 2), (2, 2, 0), (2, 3, 0),
])
def test_cia_load_values(M, N, R):
    assert bounds.cia_load(M, N) == R


def test_other_formula_values():
    assert bounds.uncoded_optimal_load(0, 2) == 2
    assert bounds.uncoded_optimal_load(F(2, 3), 2) == 1
    assert [bounds.distinct_optimal_load(M) for M in (0, F(1, 3), F(1, 2), F(2, 3), 2)] == [2, F(4, 3), F(7, 6), 1, 0]
    assert bounds.single_user_pir_bound(2, 2, 0) == F(3, 2)
    assert bounds.single_user_pir_bound(3, 2, 3) == 0
    assert bounds.single_user_pir_bound(2, 2, F(2, 3)) == 1 == bounds.cia_load(F(2, 3), 2)
    assert bounds.pd_load(2, 2, 2, 1) == F(3, 4)
    assert bounds.pd_load(4, 3, 2, 4) == 0
    assert bounds.caching_converse_quarter(2, 2, 2, 0) == F(1, 2)
    assert bounds.gap_ratio(2, 2, 2, 0) == 4
    assert bounds.gap_ratio(3, 3, 2, 3) == 1


def test_pd_memory_sharing_beats_first_corner():
    """[PAPER] K = Ku = 6, N = 2: at M = 1 the envelope through (0, 6) lies below the t = 1 point."""
    t1 = F(5, 2) * sum(F(1, 2 ** i) for i in range(6))
    assert t1 == F(315, 64)
    assert bounds.pd_load(6, 6, 2, 1) == F(69, 16) < t1


def test_yu_bound_values():
    assert bounds.yu_bound_6x6(0) == 6
    assert (F(1), F(5, 2)) in [(F(7 - l, s), F(s - 1, 2) + F(l * (l - 1), 2 * s))
                               for s in range(1, 7) for l in range(1, s + 1)]
    assert bounds.yu_bound_6x6(1) <= F(5, 2)
    assert bounds.yu_bound_6x6(6) == 0


@pytest.mark.parametrize("f,hi", [
    (lambda M: bounds.cia_load(M, 2), 2), (lambda M: bounds.cia_load(M, 3), 2),
    (lambda M: bounds.uncoded_optimal_load(M, 2), 2), (bounds.distinct_optimal_load, 2),
    (bounds.yu_bound_6x6, 6), (lambda M: bounds.pd_load(3, 4, 2, M), 3),
])
def test_out_of_range(f, hi):
    with pytest.raises(OutOfRange):
        f(F(-1, 100))
    with pytest.raises(OutOfRange):
        f(hi + F(1, 100))


def test_breakpoint_continuity():
    """Adjacent branches agree at every breakpoint (exact evaluation of both branch formulas)."""
    for N in range(2, 8):
        b1, b2 = F(N - 1, 2 * N), F(2 * (N - 1), 2 * N - 1)
        assert 2 * (1 - b1) == F(N + 1) * (3 - 2 * b1) / (2 * N + 1)
        assert F(N + 1) * (3 - 2 * b2) / (2 * N + 1) == F(N + 1) * (2 - b2) / (2 * N)
        assert 2 - F(3, 2) * b2 == F(N + 1) * (2 - b2) / (2 * N)
    assert 2 * (1 - F(1, 3)) == F(5, 3) - F(1, 3)
    assert F(5, 3) - F(2, 3) == 3 * (2 - F(2, 3)) / 4


@given(x=fractions, N=st.integers(2, 6))
def test_cia_below_uncoded_and_matches_pir_bound(x, N):
    M = 2 * x
    assert bounds.cia_load(M, N) <= bounds.uncoded_optimal_load(M, N)
    if M >= F(2 * (N - 1), 2 * N - 1):
        assert bounds.cia_load(M, N) == bounds.single_user_pir_bound(2, N, M)


@given(x=fractions, K=st.integers(2, 5), Ku=st.integers(2, 5), N=st.integers(2, 3))
def test_pd_envelope_matches_chord_oracle(x, K, Ku, N):
    M = K * x
    pts = [(F(0), F(K))] + [(F(t * K, Ku), F(Ku - t, t + 1) * sum(F(1, N ** i) for i in range(K)))
                            for t in range(Ku + 1)]
    assert bounds.pd_load(K, Ku, N, M) == min(K - M, envelope_oracle(pts, M))
    quarter = [(F(t * K, Ku), F(1, 4) * min(F(Ku - t, t + 1), K - F(t * K, Ku))) for t in range(Ku + 1)]
    assert bounds.caching_converse_quarter(K, Ku, N, M) == envelope_oracle(quarter, M)


@given(pts=st.lists(st.tuples(st.fractions(0, 5, max_denominator=12), st.fractions(0, 5, max_denominator=12)),
                    min_size=1, max_size=8),
       x=st.fractions(0, 1, max_denominator=30))
def test_lower_convex_envelope(pts, x):
    env = bounds.lower_convex_envelope(pts)
    lo, hi = env.domain
    M = lo + (hi - lo) * x
    assert env(M) == envelope_oracle(pts, M)
    assert all(env(m) <= r for m, r in pts)
    # convex: slopes non-decreasing
    cp = env.corner_points
    slopes = [(r1 - r0) / (m1 - m0) for (m0, r0), (m1, r1) in zip(cp, cp[1:])]
    assert all(a < b for a, b in zip(slopes, slopes[1:]))


@given(x=fractions)
def test_yu_curve_non_increasing(x):
    assert bounds.yu_bound_6x6(6 * x) >= bounds.yu_bound_6x6(min(6, 6 * x + F(1, 7)))


def test_gap_on_grid():
    """[PAPER] factor-8 gap; the largest ratio on this grid is 63/8."""
    worst = max(bounds.gap_ratio(K, Ku, N, M)
                for K in range(2, 7) for Ku in range(2, 7) for N in (2, 3) for M in bounds.grid(0, K, 60))
    assert worst == F(63, 8)


def test_rate_curve_validation():
    with pytest.raises(InvalidParameter):
        bounds.RateCurve(((F(1), F(1)), (F(1), F(0))))
    c = bounds.RateCurve(((F(0), F(2)), (F(1), F(1))))
    assert c.to_json() == {"points": [["0/1", "2/1"], ["1/1", "1/1"]]}
    assert c(F(1, 2)) == F(3, 2)


def test_grid():
    assert bounds.grid(0, 1, 3) == [0, F(1, 2), 1]
    assert bounds.grid(0, 1, 2, extra=[F(1, 3), 5]) == [0, F(1, 3), 1]
    assert bounds.grid(0, 2, 1) == [0]


def test_memory_share_cia_corners():
    """[DERIVED] midpoint of (1/4, 3/2) and (2/3, 1)."""
    a, b = Cia1Scheme(2), Cia2Scheme(2)
    s = bounds.memory_share(a, b, F(1, 2))
    assert s.params.M == F(11, 24) and s.params.L == 24
    assert bounds.shared_point((a.params.M, F(3, 2)), (b.params.M, F(1)), F(1, 2)) == (F(11, 24), F(5, 4))
    lib = MessageLibrary.random(2, 24, np.random.default_rng(0))
    for theta in s.demand_set():
        t = run_transcript(s, lib, theta, 1)
        assert t.correct and t.load == F(5, 4)


def test_memory_share_endpoints_and_lengths():
    a, b = Cia1Scheme(2), Cia2Scheme(2)
    assert bounds.memory_share(a, b, 1) is a and bounds.memory_share(a, b, 0) is b
    assert isinstance(bounds.memory_share(a, b, 1, L=8), Concatenated)
    with pytest.raises(IndivisibleLength):
        bounds.memory_share(a, b, F(1, 2), L=30)
    with pytest.raises(IndivisibleLength):
        bounds.memory_share(a, b, 0, L=4)
    with pytest.raises(InvalidParameter):
        bounds.memory_share(b, a, F(1, 2))
    with pytest.raises(InvalidParameter):
        bounds.memory_share(a, b, F(3, 2))
    assert bounds.memory_share(a, b, F(1, 2), L=48).params.L == 48


@pytest.mark.parametrize("lam", [F(1, 3), F(1, 2), F(3, 4)])
def test_naive_with_dd1_is_first_distinct_segment(lam):
    """[DERIVED] mixing (0, 2) with (1/3, 4/3) traces 2(1 - M)."""
    s = bounds.memory_share(NaiveScheme(2, 2, 2, 3, F(0)), dd_corner1(), 1 - lam)
    lib = MessageLibrary.random(2, s.params.L, np.random.default_rng(2))
    t = run_transcript(s, lib, (2, 1), 0)
    assert t.correct and t.load == 2 * (1 - s.params.M) == bounds.distinct_optimal_load(s.params.M)


@pytest.mark.parametrize("scheme,formula", [
    (Cia1Scheme(3), lambda M: bounds.cia_load(M, 3)),
    (Cia2Scheme(4), lambda M: bounds.cia_load(M, 4)),
    (dd_corner2(), bounds.distinct_optimal_load),
    (ProductDesign(3, 3, 2, 2), lambda M: bounds.pd_load(3, 3, 2, M)),
    (ProductDesign(2, 2, 2, 1), lambda M: bounds.pd_load(2, 2, 2, M)),
])
def test_measured_load_matches_formula(scheme, formula):
    lib = MessageLibrary.random(scheme.params.K, scheme.params.L, np.random.default_rng(3))
    t = run_transcript(scheme, lib, scheme.demand_set()[-1], 4)
    assert t.correct and t.load == formula(scheme.params.M)
