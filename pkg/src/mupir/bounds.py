"""Exact achievable loads, converse bounds, lower convex envelopes and memory
sharing.  Everything is rational; floats appear only in CSV export."""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import IndivisibleLength, InvalidParameter, OutOfRange
from .product import pd_load_formula
from .sjpir import sj_rate
from .system import Concatenated, Scheme

F = Fraction


def _check_range(M, lo, hi) -> Fraction:
    M = F(M)
    if not lo <= M <= hi:
        raise OutOfRange(f"M={M} outside [{lo}, {hi}]")
    return M


@dataclass(frozen=True)
class RateCurve:
    """Piecewise-linear function through ``corner_points`` (strictly increasing M)."""

    corner_points: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        ms = [m for m, _ in self.corner_points]
        if not ms or any(b <= a for a, b in zip(ms, ms[1:])):
            raise InvalidParameter("corner points need strictly increasing M")

    @property
    def domain(self) -> tuple[Fraction, Fraction]:
        return self.corner_points[0][0], self.corner_points[-1][0]

    def __call__(self, M) -> Fraction:
        M = F(M)
        pts = self.corner_points
        lo, hi = self.domain
        if not lo <= M <= hi:
            raise OutOfRange(f"M={M} outside [{lo}, {hi}]")
        for (m0, r0), (m1, r1) in zip(pts, pts[1:]):
            if m0 <= M <= m1:
                return r0 + (r1 - r0) * (M - m0) / (m1 - m0)
        return pts[-1][1]

    def breakpoints(self) -> list[Fraction]:
        return [m for m, _ in self.corner_points]

    def to_json(self) -> dict:
        return {"points": [[f"{m.numerator}/{m.denominator}", f"{r.numerator}/{r.denominator}"]
                           for m, r in self.corner_points]}


def lower_convex_envelope(points: Iterable[tuple]) -> RateCurve:
    """Lower convex hull of a finite point set, as a RateCurve over its M-range."""
    best: dict[Fraction, Fraction] = {}
    for m, r in points:
        m, r = F(m), F(r)
        best[m] = min(r, best.get(m, r))
    hull: list[tuple[Fraction, Fraction]] = []
    for p in sorted(best.items()):
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point unless it lies strictly below the chord
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return RateCurve(tuple(hull))


# --- two users, two messages --------------------------------------------------------

def cia_load(M, N: int) -> Fraction:
    """Achievable load of the CIA corners combined by memory sharing."""
    if N < 2:
        raise InvalidParameter("N must be >= 2")
    M = _check_range(M, 0, 2)
    if M <= F(N - 1, 2 * N):
        return 2 * (1 - M)
    if M <= F(2 * (N - 1), 2 * N - 1):
        return F(N + 1) * (3 - 2 * M) / (2 * N + 1)
    return F(N + 1) * (2 - M) / (2 * N)


def uncoded_optimal_load(M, N: int) -> Fraction:
    if N < 2:
        raise InvalidParameter("N must be >= 2")
    M = _check_range(M, 0, 2)
    if M <= F(2 * (N - 1), 2 * N - 1):
        return 2 - F(3, 2) * M
    return F(N + 1) * (2 - M) / (2 * N)


def distinct_optimal_load(M) -> Fraction:
    M = _check_range(M, 0, 2)
    if M <= F(1, 3):
        return 2 * (1 - M)
    if M <= F(2, 3):
        return F(5, 3) - M
    return F(3) * (2 - M) / 4


def single_user_pir_bound(K: int, N: int, M) -> Fraction:
    M = _check_range(M, 0, K)
    return (1 - M / K) * sj_rate(K, N)


# --- general K, Ku ------------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def pd_curve(K: int, Ku: int, N: int) -> RateCurve:
    """Envelope of the product-design corners for t = 0..Ku and the naive corner (0, K)."""
    pts = [(F(0), F(K))]
    pts += [(F(t * K, Ku), pd_load_formula(K, Ku, N, t)) for t in range(0, Ku + 1)]
    return lower_convex_envelope(pts)


def pd_load(K: int, Ku: int, N: int, M) -> Fraction:
    M = _check_range(M, 0, K)
    return min(K - M, pd_curve(K, Ku, N)(M))


@functools.lru_cache(maxsize=None)
def quarter_curve(K: int, Ku: int) -> RateCurve:
    pts = []
    for t in range(0, Ku + 1):
        m = F(t * K, Ku)
        pts.append((m, F(1, 4) * min(F(Ku - t, t + 1), K - m)))
    return lower_convex_envelope(pts)


def caching_converse_quarter(K: int, Ku: int, N: int, M) -> Fraction:
    """A quarter of the coded-caching bound, enveloped over t = 0..Ku
    (``N`` does not enter; kept for a uniform signature)."""
    M = _check_range(M, 0, K)
    return quarter_curve(K, Ku)(M)


def gap_ratio(K: int, Ku: int, N: int, M) -> Fraction:
    num = pd_load(K, Ku, N, M)
    den = caching_converse_quarter(K, Ku, N, M)
    if den == 0:
        if num != 0:
            raise ArithmeticError(f"converse is 0 but load is {num} at M={M}")
        return F(1)
    return num / den


@functools.lru_cache(maxsize=None)
def yu_curve_6x6() -> RateCurve:
    pts = [(F(0), F(6))]
    for s in range(1, 7):
        for l in range(1, s + 1):
            pts.append((F(7 - l, s), F(s - 1, 2) + F(l * (l - 1), 2 * s)))
    return lower_convex_envelope(pts)


def yu_bound_6x6(M) -> Fraction:
    M = _check_range(M, 0, 6)
    return yu_curve_6x6()(M)


# --- memory sharing -----------------------------------------------------------------

def memory_share(a: Scheme, b: Scheme, lam, L: int | None = None) -> Scheme:
    """Serve a ``lam`` fraction of every message with ``a`` and the rest with ``b``.

    Returns ``a`` or ``b`` itself at the endpoints.  ``L`` (optional) asks for a
    specific message length, which must be a multiple of the smallest one.
    """
    lam = F(lam)
    if not 0 <= lam <= 1:
        raise InvalidParameter(f"lambda={lam} outside [0, 1]")
    if a.params.M >= b.params.M:
        raise InvalidParameter(f"need M_A < M_B, got {a.params.M} and {b.params.M}")
    if lam in (0, 1):
        s = a if lam == 1 else b
        if L is None or L == s.params.L:
            return s
        if L % s.params.L:
            raise IndivisibleLength(f"L={L} is not a multiple of {s.params.L}")
        return Concatenated([(s, L // s.params.L)])
    p, q = lam.numerator, lam.denominator
    la, lb = a.params.L, b.params.L
    # blocks na, nb with na*la : nb*lb = p : (q - p)
    g = math.gcd(lb * p, la * (q - p))
    na, nb = lb * p // g, la * (q - p) // g
    base = na * la + nb * lb
    if L is not None:
        if L % base:
            raise IndivisibleLength(f"L={L} is not a multiple of {base}")
        na, nb = na * (L // base), nb * (L // base)
    return Concatenated([(a, na), (b, nb)])


def shared_point(a: tuple, b: tuple, lam) -> tuple[Fraction, Fraction]:
    """Memory-load pair of the ``lam``-mixture of corner points ``a`` and ``b``."""
    lam = F(lam)
    return lam * F(a[0]) + (1 - lam) * F(b[0]), lam * F(a[1]) + (1 - lam) * F(b[1])


def grid(lo, hi, points: int, extra: Sequence = ()) -> list[Fraction]:
    """``points`` uniformly spaced rationals on [lo, hi] plus ``extra`` breakpoints."""
    lo, hi = F(lo), F(hi)
    if points < 1:
        return sorted(set(F(x) for x in extra if lo <= F(x) <= hi))
    if points == 1:
        base = [lo]
    else:
        base = [lo + (hi - lo) * i / (points - 1) for i in range(points)]
    return sorted(set(base) | set(F(x) for x in extra if lo <= F(x) <= hi))
