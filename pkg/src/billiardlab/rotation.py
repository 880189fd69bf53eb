"""Continued fractions and hitting times of irrational circle rotations."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from sortedcontainers import SortedList

FLOAT_BITS = 52


def _exact(alpha) -> Fraction:
    if isinstance(alpha, Fraction):
        return alpha
    if isinstance(alpha, int):
        return Fraction(alpha)
    x = float(alpha)
    if not math.isfinite(x):
        raise ValueError("alpha must be finite")
    return Fraction(x)


@dataclass(frozen=True)
class ContinuedFraction:
    """Expansion ``alpha = [0; a_1, a_2, ...]`` with convergents ``p[n]/q[n]``, ``n >= 0``.

    ``p[0]/q[0] = 0/1``; ``partial_quotients[n-1]`` is ``a_n``.
    """

    alpha: Fraction
    partial_quotients: Tuple[int, ...]
    p: Tuple[int, ...]
    q: Tuple[int, ...]
    truncated: bool = False
    precision_bits: Optional[int] = None

    @property
    def depth(self) -> int:
        return len(self.partial_quotients)

    def distance(self, n: int) -> Fraction:
        """``||q_n alpha||`` measured against the convergent numerator, exactly."""
        return abs(self.q[n] * self.alpha - self.p[n])


def cf_expand(alpha, depth: int, precision_bits: Optional[int] = None) -> ContinuedFraction:
    """Floor/reciprocal expansion of ``alpha`` in (0, 1), carried out in exact rationals.

    Floats are expanded as the binary rational they are, but the expansion
    stops, flagged ``truncated``, once the convergent agrees with ``alpha`` to
    ``precision_bits`` (52 for floats); beyond that the quotients describe
    rounding noise. Exact ``Fraction`` input is trusted to full precision
    unless ``precision_bits`` is given. An exactly rational value is flagged
    when its expansion terminates before ``depth``.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    x = _exact(alpha)
    if not 0 < x < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if precision_bits is None and not isinstance(alpha, (Fraction, int)):
        precision_bits = FLOAT_BITS
    tol = None if precision_bits is None else x / (1 << precision_bits)
    # the ends of the uncertainty interval are expanded alongside x
    band = [] if tol is None else [x - tol, x + tol]
    a: List[int] = []
    p = [0]
    q = [1]
    p_prev, q_prev = 1, 0
    r = x
    truncated = False
    for _ in range(depth):
        if r == 0 or any(b <= 0 for b in band):
            truncated = True
            break
        inv = 1 / r
        k = math.floor(inv)
        ks = [math.floor(1 / b) for b in band]
        pn, qn = k * p[-1] + p_prev, k * q[-1] + q_prev
        close = tol is not None and abs(x - Fraction(pn, qn)) <= tol
        if any(kb != k for kb in ks) and not close:
            # the next quotient is not determined at this precision
            truncated = True
            break
        r = inv - k
        band = [1 / b - k for b in band]
        a.append(k)
        p_prev, q_prev = p[-1], q[-1]
        p.append(pn)
        q.append(qn)
        if close:
            truncated = True
            break
    return ContinuedFraction(x, tuple(a), tuple(p), tuple(q), truncated, precision_bits)


def hitting_bound(cf: ContinuedFraction, mu) -> int:
    """``2 q_{n+1} q_n`` for the least ``n`` with ``1/q_{n+1} < mu``."""
    mu = Fraction(mu) if not isinstance(mu, Fraction) else mu
    if not 0 < mu < Fraction(1, 2):
        raise ValueError("mu must lie in (0, 0.5)")
    for n in range(len(cf.q) - 1):
        if Fraction(1, cf.q[n + 1]) < mu:
            return 2 * cf.q[n + 1] * cf.q[n]
    raise ValueError(f"expansion too shallow: 1/q_{len(cf.q) - 1} = 1/{cf.q[-1]} is not below mu; "
                     "expand to a greater depth")


@dataclass(frozen=True)
class Unresolved:
    cap: int
    max_gap: float


@dataclass(frozen=True)
class HittingResult:
    mu: float
    L_exact: Union[int, Unresolved]
    L_bound: int

    @property
    def consistent(self) -> bool:
        return isinstance(self.L_exact, Unresolved) or self.L_exact <= self.L_bound


class _GapTracker:
    """Orbit points of ``k * num / den`` mod 1 as integers, with the multiset of circular gaps."""

    def __init__(self, alpha: Fraction):
        self.num, self.den = alpha.numerator, alpha.denominator
        self.points = SortedList([0])
        self.gaps = SortedList([self.den])
        self.k = 0
        self.x = 0

    def step(self):
        self.k += 1
        self.x = (self.x + self.num) % self.den
        x, pts = self.x, self.points
        i = pts.bisect_left(x)
        lo = pts[i - 1] if i > 0 else pts[-1] - self.den
        hi = pts[i] if i < len(pts) else pts[0] + self.den
        self.gaps.remove(hi - lo)
        self.gaps.add(x - lo)
        self.gaps.add(hi - x)
        pts.add(x)

    @property
    def max_gap(self) -> int:
        return self.gaps[-1]


def hitting_exact(alpha, mu, cap: int) -> Union[int, Unresolved]:
    """Least ``L`` such that ``{0, alpha, ..., L alpha}`` mod 1 leaves no gap of length ``mu``.

    The orbit starts at 0; rotations commute with translations, so any other
    start gives the same answer.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    a = _exact(alpha) % 1
    if a == 0:
        raise ValueError("alpha must not be an integer")
    mu = Fraction(mu) if not isinstance(mu, Fraction) else mu
    if not 0 < mu < Fraction(1, 2):
        raise ValueError("mu must lie in (0, 0.5)")
    g = _GapTracker(a)
    limit = mu * g.den
    while g.k < cap:
        g.step()
        if g.max_gap < limit:
            return g.k
    return Unresolved(cap, g.max_gap / g.den)


def max_gap_sequence(alpha, steps: int) -> List[Fraction]:
    """Largest gap after each of ``1..steps`` rotation steps (ordered-set engine)."""
    g = _GapTracker(_exact(alpha) % 1)
    out = []
    for _ in range(steps):
        g.step()
        out.append(Fraction(g.max_gap, g.den))
    return out


def gap_lengths(alpha, k: int) -> List[Fraction]:
    """Distinct gaps among ``{0, alpha, ..., k alpha}`` mod 1 by direct sorting."""
    a = _exact(alpha) % 1
    num, den = a.numerator, a.denominator
    pts = sorted((j * num) % den for j in range(k + 1))
    diffs = {b - c for b, c in zip(pts[1:], pts[:-1])}
    diffs.add(pts[0] + den - pts[-1])
    return sorted(Fraction(d, den) for d in diffs)


def hitting_table(alpha, mus: Sequence, cap: int, depth: int = 64,
                  precision_bits: Optional[int] = None) -> List[HittingResult]:
    cf = cf_expand(alpha, depth, precision_bits)
    return [HittingResult(float(m), hitting_exact(alpha, m, cap), hitting_bound(cf, m)) for m in mus]


def khintchin_diagnostic(cf: ContinuedFraction) -> List[Tuple[int, float]]:
    """``(n, ln(q_n)/n)`` for every computed level ``n >= 1``."""
    return [(n, math.log(cf.q[n]) / n) for n in range(1, len(cf.q))]


def loglog_slope(mus: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of ``log value`` against ``log(1/mu)``."""
    x = np.log(1.0 / np.asarray(mus, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def random_alpha(rng, bits: int = 256) -> Fraction:
    """Uniform draw from (0, 1) kept as an exact ``bits``-bit rational."""
    while True:
        k = int(rng.integers(0, 1 << 62)) if bits <= 62 else _randbits(rng, bits)
        if k:
            return Fraction(k, 1 << bits)


def _randbits(rng, bits: int) -> int:
    out = 0
    for _ in range((bits + 31) // 32):
        out = (out << 32) | int(rng.integers(0, 1 << 32))
    return out >> ((bits + 31) // 32 * 32 - bits)
