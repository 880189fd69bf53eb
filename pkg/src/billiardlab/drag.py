"""Transverse dragging of even-period orbits until they meet a vertex."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .development import PeriodicOrbit, closure_residual
from .geometry import DEFAULT_TOL, Point2, Rhombus, Tolerances, polygon_of
from .unfolding import OrbitVertexHit, Trace, trace_orbit

BISECT_TOL = 1e-12


class ParityError(ValueError):
    pass


class StepTooLarge(RuntimeError):
    pass


@dataclass(frozen=True)
class InducedDiagonal:
    source: int
    direction: float  # relative to the vertex frame of ``source``
    heading: Point2
    reflections: int
    target: int
    boundary: bool
    verified: bool

    def as_record(self) -> dict:
        return {"source_vertex": self.source, "direction_radians": self.direction,
                "reflections": self.reflections, "target_vertex": self.target,
                "boundary": self.boundary, "verified": self.verified}


@dataclass(frozen=True)
class VertexEncounter:
    vertex: int
    offset: float  # transverse distance dragged when the event was localized
    gap: float  # distance from the orbit to the vertex at that point
    diagonal: InducedDiagonal


@dataclass
class DragOutcome:
    steps: int
    max_residual: float
    final_orbit: PeriodicOrbit
    encounter: Optional[VertexEncounter] = None
    residuals: List[float] = field(default_factory=list)

    @property
    def status(self) -> str:
        return "vertex_encounter" if self.encounter else "final_orbit"


def _start_side(poly, p: Point2) -> int:
    best, side = math.inf, -1
    for i in range(poly.n_sides):
        a, b = poly.side(i)
        ex, ey = b[0] - a[0], b[1] - a[1]
        d = abs(ex * (p[1] - a[1]) - ey * (p[0] - a[0])) / math.hypot(ex, ey)
        if d < best:
            best, side = d, i
    return side


class _Dragger:
    def __init__(self, rh, orbit: PeriodicOrbit, tol: Tolerances):
        self.poly = polygon_of(rh)
        self.orbit = orbit
        self.tol = tol
        self.side = _start_side(self.poly, orbit.start)
        a, _ = self.poly.side(self.side)
        self.a = a
        self.e = self.poly.side_direction(self.side)
        self.len = self.poly.side_length(self.side)
        self.s0 = (orbit.start[0] - a[0]) * self.e[0] + (orbit.start[1] - a[1]) * self.e[1]
        d = orbit.direction
        n = (-d[1], d[0])
        # moving along the side by ds shifts the orbit line by ds * (e . n)
        self.gain = self.e[0] * n[0] + self.e[1] * n[1]
        if abs(self.gain) < 1e-12:
            raise ValueError("orbit runs parallel to its base side")

    def point(self, offset: float) -> Optional[Point2]:
        s = self.s0 + offset / self.gain
        if not 0.0 < s < self.len:
            return None
        return (self.a[0] + s * self.e[0], self.a[1] + s * self.e[1])

    def trace(self, offset: float):
        p = self.point(offset)
        if p is None:
            return None, None
        return p, trace_orbit(self.poly, p, self.orbit.direction, self.orbit.period, self.tol)

    def good(self, offset: float) -> Tuple[bool, Optional[Trace], Optional[Point2]]:
        p, tr = self.trace(offset)
        if tr is None or isinstance(tr, OrbitVertexHit):
            return False, None, p
        res = closure_residual(tr, p, self.orbit.direction)
        ok = tr.itinerary == self.orbit.itinerary and res < 1e-9 * tr.length
        if not ok and res < 1e-9 * tr.length:
            raise StepTooLarge("dragged orbit closed with a different itinerary: a vertex event was "
                               "skipped, retry with a smaller transverse_step")
        return ok, tr, p


def _induced(poly, tr: Trace, start: Point2, d: Point2, period: int, tol: Tolerances):
    """Vertex nearest the orbit and the diagonal obtained by leaving it backwards along the orbit."""
    best = (math.inf, -1, None)
    dirs = []
    cur = d
    # incoming direction at reflection point i is the direction of segment i
    pts = tr.points
    for i in range(1, len(pts)):
        dirs.append(cur)
        side = tr.itinerary[i - 1]
        ux, uy = poly.side_direction(side)
        k = 2.0 * (cur[0] * ux + cur[1] * uy)
        cur = (k * ux - cur[0], k * uy - cur[1])
    for i in range(1, len(pts)):
        for v, w in enumerate(poly.vertices):
            g = math.hypot(pts[i][0] - w[0], pts[i][1] - w[1])
            if g < best[0]:
                best = (g, v, dirs[i - 1])
    gap, v, d_in = best
    back = (-d_in[0], -d_in[1])
    frame = poly.vertex_frame(v)
    bx, by = math.cos(frame), math.sin(frame)
    rel = math.atan2(bx * back[1] - by * back[0], bx * back[0] + by * back[1])
    angle = poly.vertex_angle(v)
    edge = 1e-9
    if rel <= edge or rel >= angle - edge:
        # the orbit slides along a side into the vertex
        nxt = (v + 1) % poly.n_sides if rel <= edge else (v - 1) % poly.n_sides
        diag = InducedDiagonal(v, min(max(rel, 0.0), angle), back, 0, nxt, True, True)
        return gap, v, diag
    res = trace_orbit(poly, poly.vertices[v], back, period + 1, tol)
    if isinstance(res, OrbitVertexHit):
        diag = InducedDiagonal(v, rel, back, res.after, res.vertex, False, True)
    else:
        diag = InducedDiagonal(v, rel, back, -1, -1, False, False)
    return gap, v, diag


def drag_orbit(rh: Rhombus, orbit: PeriodicOrbit, transverse_step: float, max_drags: int,
               tol: Tolerances = DEFAULT_TOL) -> DragOutcome:
    """Translate the orbit sideways, direction fixed, re-tracing after every step.

    The base point slides along its side so that the orbit line moves by
    ``transverse_step`` (positive: to the left of the direction of travel).
    Closure persists until a reflection point reaches a vertex; that event is
    bisected down to ``1e-12`` and reported with the diagonal it induces.
    """
    if orbit.period % 2:
        raise ParityError(f"period {orbit.period} is odd; dragging needs an even period")
    if transverse_step == 0 or max_drags < 1:
        raise ValueError("need a nonzero step and max_drags >= 1")
    dr = _Dragger(rh, orbit, tol)
    ok, tr, p = dr.good(0.0)
    if not ok:
        raise ValueError("input orbit does not close")
    residuals = [closure_residual(tr, p, orbit.direction)]
    offset = 0.0
    for step in range(1, max_drags + 1):
        nxt = offset + transverse_step
        ok, tr_n, p_n = dr.good(nxt)
        if ok:
            offset, tr, p = nxt, tr_n, p_n
            residuals.append(closure_residual(tr, p, orbit.direction))
            continue
        lo, hi = offset, nxt
        while abs(hi - lo) > BISECT_TOL:
            mid = 0.5 * (lo + hi)
            ok, tr_m, p_m = dr.good(mid)
            if ok:
                lo, tr, p = mid, tr_m, p_m
                residuals.append(closure_residual(tr, p, orbit.direction))
            else:
                hi = mid
        gap, v, diag = _induced(dr.poly, tr, p, orbit.direction, orbit.period, tol)
        final = PeriodicOrbit(p, orbit.direction, tr.itinerary, orbit.period, tr.length, residuals[-1])
        return DragOutcome(step, max(residuals), final, VertexEncounter(v, lo, gap, diag), residuals)
    final = PeriodicOrbit(p, orbit.direction, tr.itinerary, orbit.period, tr.length, residuals[-1])
    return DragOutcome(max_drags, max(residuals), final, None, residuals)


def drag_toward(rh: Rhombus, orbit: PeriodicOrbit, target: Point2, step: float, max_drags: int,
                tol: Tolerances = DEFAULT_TOL) -> DragOutcome:
    """Drag with the sign that moves the orbit line towards ``target``."""
    d = orbit.direction
    n = (-d[1], d[0])
    side = (target[0] - orbit.start[0]) * n[0] + (target[1] - orbit.start[1]) * n[1]
    return drag_orbit(rh, orbit, math.copysign(abs(step), side if side != 0 else 1.0), max_drags, tol)
