"""Indexed partitions of the direction interval and interval selection."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence

import numpy as np
from scipy.optimize import brentq

DUPLICATE_TOL = 1e-12


@dataclass(frozen=True)
class IndexedPartition:
    """Sorted cut points in (0, 1), each labelled by the reflection count of its diagonal."""

    cut_points: tuple
    indices: tuple
    n: int
    vertex_angle: float = 1.0

    def __post_init__(self):
        if len(self.cut_points) != len(self.indices):
            raise ValueError("cut_points and indices differ in length")
        if any(b <= a for a, b in zip(self.cut_points, self.cut_points[1:])):
            raise ValueError("cut points must be strictly increasing")
        if any(k < 0 or k > self.n for k in self.indices):
            raise ValueError("indices must lie in [0, n]")

    def __len__(self):
        return len(self.cut_points)

    def intervals(self):
        """Consecutive ``(left, right, left_index, right_index)``; the ends 0 and 1 carry index -1."""
        pts = (0.0,) + tuple(self.cut_points) + (1.0,)
        idx = (-1,) + tuple(self.indices) + (-1,)
        return [(pts[i], pts[i + 1], idx[i], idx[i + 1]) for i in range(len(pts) - 1)]


def build_partition(diagonals: Sequence, vertex_angle: float, n: int) -> IndexedPartition:
    """Partition of [0, 1] by the directions of ``diagonals`` (all from one vertex) divided by the angle."""
    sources = {g.source for g in diagonals}
    if len(sources) > 1:
        raise ValueError("diagonals must emanate from a single vertex")
    pairs = []
    for g in diagonals:
        if not 0.0 < g.direction < vertex_angle:
            raise ValueError(f"direction {g.direction} outside the vertex angle")
        if g.reflections > n:
            raise ValueError(f"diagonal with {g.reflections} reflections exceeds n = {n}")
        pairs.append((g.direction / vertex_angle, g.reflections))
    pairs.sort()
    pts: List[float] = []
    idx: List[int] = []
    for x, k in pairs:
        if pts and x - pts[-1] <= DUPLICATE_TOL:
            idx[-1] = min(idx[-1], k)
            continue
        pts.append(x)
        idx.append(k)
    return IndexedPartition(tuple(pts), tuple(idx), n, vertex_angle)


def partition_diameter(p: IndexedPartition) -> float:
    pts = np.concatenate(([0.0], np.asarray(p.cut_points, dtype=float), [1.0]))
    return float(np.max(np.diff(pts)))


@dataclass(frozen=True)
class GoodInterval:
    left: float
    right: float
    left_index: int
    right_index: int

    @property
    def length(self) -> float:
        return self.right - self.left

    def as_record(self) -> dict:
        return {"left": self.left, "right": self.right, "left_index": self.left_index,
                "right_index": self.right_index, "length": self.length}


@dataclass
class NotFound:
    reason: str
    detail: str = ""
    stats: Dict[str, float] = field(default_factory=dict)


def selection_bounds(n: int, gamma: float, c: float):
    """``(min_length, min_index)`` that a selected interval must beat."""
    return 1.0 / (6.0 * n ** (gamma + 1.0)), math.floor(n / (24.0 * c)) ** (1.0 / (gamma + 1.0))


def find_good_interval(p: IndexedPartition, gamma: float, c: float):
    """Select a long partition interval whose endpoints both carry large indices.

    Follows the selection argument step by step: cells of width ``c/n`` each
    contribute their leftmost cut point, every other representative is kept,
    consecutive kept points bound the candidate windows, sparsely cut windows
    contribute their longest partition interval, and intervals touching a low
    index are discarded. Returns the leftmost survivor or :class:`NotFound`.
    """
    n = p.n
    if n < 1 or gamma <= 0 or c <= 0:
        raise ValueError("need n >= 1, gamma > 0, c > 0")
    size, diam = len(p), partition_diameter(p)
    stats = {"size": size, "diameter": diam, "size_bound": n ** (gamma + 1.0), "diameter_bound": c / n}
    if not size < n ** (gamma + 1.0):
        return NotFound("hypothesis", f"|zeta| = {size} is not below n^(gamma+1) = {n ** (gamma + 1.0):.6g}", stats)
    if not diam < c / n:
        return NotFound("hypothesis", f"diameter {diam:.6g} is not below c/n = {c / n:.6g}", stats)

    pts = list(p.cut_points)
    width = c / n
    cells = int(math.floor(n / c))
    reps: List[int] = []  # positions into pts
    for k in range(1, cells + 1):
        lo, hi = (k - 1) * width, k * width
        j = bisect.bisect_left(pts, lo)
        if j < len(pts) and pts[j] <= hi and (not reps or j != reps[-1]):
            reps.append(j)
    odd = reps[0::2]  # x_1, x_3, x_5, ...
    threshold = 6.0 * c * n ** gamma
    min_len, min_index = selection_bounds(n, gamma, c)
    stats.update({"cells": cells, "representatives": len(reps), "windows": max(len(odd) - 1, 0)})

    survivors = []
    sparse = 0
    for a, b in zip(odd, odd[1:]):
        # cut points strictly inside (x_a, x_b)
        if b - a - 1 >= threshold:
            continue
        sparse += 1
        best, best_len = -1, -1.0
        for i in range(a, b):
            length = pts[i + 1] - pts[i]
            if length > best_len:
                best, best_len = i, length
        if best_len < min_len:
            continue
        li, ri = p.indices[best], p.indices[best + 1]
        if li > min_index and ri > min_index:
            survivors.append(GoodInterval(pts[best], pts[best + 1], li, ri))
    stats.update({"sparse_windows": sparse, "survivors": len(survivors)})
    if not survivors:
        return NotFound("no-survivor", "every candidate interval touches a low index or is too short", stats)
    return survivors[0]


def check_good_interval(g: GoodInterval, n: int, gamma: float, c: float) -> bool:
    """Both conclusions of the selection: long enough and high indices at both ends."""
    min_len, min_index = selection_bounds(n, gamma, c)
    return g.length >= min_len and g.left_index > min_index and g.right_index > min_index


def _feasibility(gamma: float) -> float:
    t = gamma + 1.0
    return 3.0 * (t - 1.0 / t) - 1.0 / t


def critical_gamma() -> float:
    """Positive root of ``3(t - 1/t) = 1/t`` with ``t = gamma + 1``, i.e. ``2/sqrt(3) - 1``."""
    root = brentq(_feasibility, 0.0, 1.0, xtol=1e-16, rtol=4 * np.finfo(float).eps)
    closed = 2.0 / math.sqrt(3.0) - 1.0
    if abs(root - closed) > 1e-12:
        raise ArithmeticError(f"root {root!r} disagrees with closed form {closed!r}")
    return root


def feasibility_residual(gamma: float) -> float:
    return _feasibility(gamma)


def feasible(gamma: float, eps: float) -> bool:
    """Whether beams of the selected length outrun the periodic-orbit search cost at this gamma."""
    e = 1.0 / (gamma + 1.0) - gamma - 1.0
    return (-3.0 - eps) * e < 1.0 / (gamma + 1.0)


@dataclass(frozen=True)
class GrowthFit:
    exponent: float
    r_squared: float
    degenerate: bool = False


def fit_growth_exponent(series: Mapping[int, float]) -> GrowthFit:
    """Least-squares slope of ``log P`` against ``log n``."""
    items = sorted((int(k), float(v)) for k, v in series.items())
    if len(items) < 5:
        raise ValueError("need at least 5 points")
    if any(n < 1 or v < 1 for n, v in items):
        raise ValueError("need n >= 1 and P_n >= 1")
    x = np.log([n for n, _ in items])
    y = np.log([v for _, v in items])
    if np.ptp(y) == 0.0:
        return GrowthFit(0.0, 0.0, True)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return GrowthFit(float(slope), r2)


def synthetic_partition(n: int, gamma: float, c: float, rng, fill: float = 0.9) -> IndexedPartition:
    """Random partition meeting both hypotheses of the selection.

    Gaps are drawn below ``c/n``; the r-th point in a random order gets index
    ``ceil((r+2)^(1/(gamma+1)))`` so that fewer than ``m^(gamma+1)`` points have
    index ``<= m``.
    """
    # gaps no shorter than this keep the point count under n^(gamma+1)
    lower = max(0.2, 1.05 * n ** -gamma / c)
    if lower >= fill:
        raise ValueError("no partition meets both hypotheses for these parameters")
    gaps = []
    total = 0.0
    while total < 1.0:
        g = rng.uniform(lower, fill) * c / n
        gaps.append(g)
        total += g
    pts = np.cumsum(gaps[:-1])
    pts = pts[pts < 1.0 - 1e-12]
    order = rng.permutation(len(pts))
    idx = np.empty(len(pts), dtype=np.int64)
    ranks = np.arange(len(pts))
    idx[order] = np.minimum(np.ceil((ranks + 2.0) ** (1.0 / (gamma + 1.0))).astype(np.int64), n)
    return IndexedPartition(tuple(float(x) for x in pts), tuple(int(k) for k in idx), n)
