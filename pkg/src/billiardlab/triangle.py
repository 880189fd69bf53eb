"""Right triangle versus its associated rhombus.

The rhombus is four copies of the triangle glued around the right angle, so
the map ``(x, y) -> (|x|, |y|)`` folds any rhombus orbit onto a triangle
orbit. Each crossing of a coordinate axis becomes a reflection on a leg; a
crossing of both axes at once is a hit on the right-angle vertex, which ends
the triangle orbit early.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import List

from .geometry import DEFAULT_TOL, RightTriangle, Tolerances, triangle_to_rhombus
from .unfolding import (
    DEFAULT_NODE_BUDGET,
    GeneralizedDiagonal,
    OrbitVertexHit,
    complexity,
    trace_to_vertex,
)

# rhombus vertex -> triangle vertex (E, W fold onto the acute vertex, N, S onto the other)
RHOMBUS_TO_TRIANGLE = {0: 1, 1: 2, 2: 1, 3: 2}


@dataclass(frozen=True)
class FoldedDiagonal:
    source: int
    direction: float
    reflections: int
    target: int
    through_center: bool


def _relative(t: RightTriangle, vertex: int, d) -> float:
    frame = t.vertex_frame(vertex)
    bx, by = math.cos(frame), math.sin(frame)
    return math.atan2(bx * d[1] - by * d[0], bx * d[0] + by * d[1])


def fold_diagonal(t: RightTriangle, g: GeneralizedDiagonal, tol: Tolerances = DEFAULT_TOL) -> FoldedDiagonal:
    """Fold a diagonal of ``triangle_to_rhombus(t)`` into ``t``."""
    rh = triangle_to_rhombus(t)
    src = rh.vertices[g.source]
    hit = trace_to_vertex(rh, src, g.heading, g.reflections, tol)
    if not isinstance(hit, OrbitVertexHit):
        raise RuntimeError("rhombus diagonal did not reproduce under tracing")
    pts = hit.points
    eps = tol.vertex_rel * rh.diameter()
    crossings = 0
    d0 = (pts[1][0] - pts[0][0], pts[1][1] - pts[0][1])
    # the fold (x, y) -> (|x|, |y|) near the source: E and W sit on the x-axis,
    # N and S on the y-axis, and W, S also flip their along-axis component
    sx = -1.0 if g.source == 2 else 1.0
    sy = -1.0 if g.source == 3 else 1.0
    if g.source in (0, 2):
        first = (sx * d0[0], abs(d0[1]))
    else:
        first = (abs(d0[0]), sy * d0[1])
    source = RHOMBUS_TO_TRIANGLE[g.source]
    direction = _relative(t, source, first)
    for i, ((ax, ay), (bx, by)) in enumerate(zip(pts[:-1], pts[1:])):
        ts = []
        for a, b in ((ax, bx), (ay, by)):
            if (a > eps and b < -eps) or (a < -eps and b > eps):
                ts.append(a / (a - b))
        if len(ts) == 2 and abs(ts[0] - ts[1]) * math.hypot(bx - ax, by - ay) <= eps:
            # through the centre: the folded orbit stops at the right angle
            return FoldedDiagonal(source, direction, i + crossings, 0, True)
        crossings += len(ts)
    return FoldedDiagonal(source, direction, g.reflections + crossings,
                          RHOMBUS_TO_TRIANGLE[g.target], False)


def is_leg(t: RightTriangle, f: FoldedDiagonal, eps: float = 1e-12) -> bool:
    """Folded image of an axis diagonal: it slides along a leg."""
    return abs(f.direction) <= eps or abs(f.direction - t.vertex_angle(f.source)) <= eps


@dataclass
class BoundCheck:
    n: int
    P_triangle_3n: int
    P_rhombus_n: int
    holds: bool
    triangle_interior: int = 0
    legs: int = 0
    folded: int = 0
    through_center: int = 0
    unmatched_folds: int = 0
    max_folded_length: int = 0
    notes: List[str] = field(default_factory=list)


def _lookup(diags: List[GeneralizedDiagonal], reflections: int, direction: float, tol: float) -> bool:
    keys = [g.direction for g in diags]
    pos = bisect.bisect_left(keys, direction - tol)
    while pos < len(diags) and keys[pos] <= direction + tol:
        if diags[pos].reflections == reflections:
            return True
        pos += 1
    return False


def triangle_complexity_bound_check(t: RightTriangle, n: int, node_budget: int = DEFAULT_NODE_BUDGET,
                                    tol: Tolerances = DEFAULT_TOL, match_tol: float = 1e-9) -> BoundCheck:
    """Compare triangle diagonals up to ``3n`` reflections with rhombus diagonals up to ``n``.

    The triangle count is a direct enumeration in the triangle plus its two
    legs, which are the folds of the rhombus axes. Every rhombus diagonal is
    also folded back and looked up in the triangle enumeration; misses are
    reported in ``unmatched_folds``.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    rh = triangle_to_rhombus(t)
    rrep = complexity(rh, n, node_budget=node_budget, tol=tol)
    trep = complexity(t, 3 * n, node_budget=node_budget, tol=tol)
    interior = trep.P(3 * n)
    p_rh = rrep.P(n)
    out = BoundCheck(n, interior + 2, p_rh, False, triangle_interior=interior, legs=2)
    for v, diags in rrep.per_vertex.items():
        for g in diags:
            f = fold_diagonal(t, g, tol)
            out.folded += 1
            out.through_center += int(f.through_center)
            out.max_folded_length = max(out.max_folded_length, f.reflections)
            if is_leg(t, f):
                continue
            if f.reflections > 3 * n or not _lookup(trep.per_vertex[f.source], f.reflections,
                                                    f.direction, match_tol):
                out.unmatched_folds += 1
    out.holds = out.P_triangle_3n >= out.P_rhombus_n
    if out.unmatched_folds:
        out.notes.append(f"{out.unmatched_folds} folded rhombus diagonals missing from the triangle enumeration")
    return out
