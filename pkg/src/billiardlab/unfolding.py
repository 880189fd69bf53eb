"""Angular beam propagation through the unfolding of a convex billiard table.

A beam is a sector of directions leaving a fixed vertex (the apex) whose
trajectories share one development. At every depth each beam is cut by the
vertex images of its current copy that fall strictly inside it; every such
vertex is a generalized diagonal whose algebraic length is the depth.

Directions of diagonals are stored *relative* to the apex sector: ``0`` is the
side towards the next vertex, ``vertex_angle`` the side towards the previous
one (see :meth:`ConvexPolygon.vertex_frame`). The branch cut of ``atan2`` is
therefore never inside a sector.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .geometry import (
    DEFAULT_TOL,
    ConvexPolygon,
    GeometryError,
    PlanarIsometry,
    Point2,
    Tolerances,
    VertexHit,
    polygon_of,
    ray_exit,
    reflect_across_segment,
    reflect_vector,
    unit,
    unit_from_angle,
)

Itinerary = Tuple[int, ...]

DEFAULT_NODE_BUDGET = 10**7
DEDUP_ANGLE_TOL = 1e-10


class BudgetExceeded(RuntimeError):
    """Beam count went over the node budget; ``partial`` holds what was found."""

    def __init__(self, message: str, partial: "BeamResult"):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class UnfoldingNode:
    iso: PlanarIsometry
    depth: int
    itinerary: Itinerary = ()


@dataclass(frozen=True)
class AngularBeam:
    apex: int
    theta_lo: float
    theta_hi: float
    node: UnfoldingNode
    exit_side: int = -1

    @property
    def width(self) -> float:
        return self.theta_hi - self.theta_lo


@dataclass(frozen=True)
class GeneralizedDiagonal:
    source: int
    direction: float
    reflections: int
    target: int
    target_vertex_image: Point2
    itinerary: Itinerary
    heading: float = field(default=0.0, compare=False)

    def as_record(self) -> dict:
        return {
            "source_vertex": self.source,
            "direction_radians": self.direction,
            "reflections": self.reflections,
            "target_vertex": self.target,
            "itinerary": list(self.itinerary),
        }


@dataclass
class BeamResult:
    apex: int
    n_max: int
    diagonals: List[GeneralizedDiagonal]
    leaves: List[AngularBeam]
    complete: bool = True
    depth_reached: int = 0
    nodes: int = 0


def _exit_side(vs: Sequence[Point2], apex: Point2, d: Point2, entry: int, eps: float) -> int:
    """Side through which the ray from ``apex`` leaves the convex copy ``vs``."""
    ox, oy = apex
    dx, dy = d
    n = len(vs)
    best_t, best = -math.inf, -1
    for i in range(n):
        if i == entry:
            continue
        ax, ay = vs[i]
        bx, by = vs[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        denom = dx * ey - dy * ex
        if denom == 0.0:
            continue
        wx, wy = ax - ox, ay - oy
        t = (wx * ey - wy * ex) / denom
        if t <= eps:
            continue
        u = (wx * dy - wy * dx) / denom
        if -1e-9 <= u <= 1.0 + 1e-9 and t > best_t:
            best_t, best = t, i
    if best < 0:
        raise GeometryError("beam ray does not cross its copy")
    return best


def propagate_beams(
    shape,
    apex: int,
    n_max: int,
    node_budget: int = DEFAULT_NODE_BUDGET,
    tol: Tolerances = DEFAULT_TOL,
) -> BeamResult:
    """Enumerate generalized diagonals from vertex ``apex`` with at most ``n_max`` reflections.

    Raises :class:`BudgetExceeded` (carrying the partial result, flagged
    incomplete) when the total number of processed beams exceeds
    ``node_budget``.
    """
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    poly = polygon_of(shape)
    vs0 = poly.vertices
    nv = len(vs0)
    if not 0 <= apex < nv:
        raise ValueError(f"apex must be a vertex id in [0, {nv})")
    a = vs0[apex]
    frame = poly.vertex_frame(apex)
    bx, by = math.cos(frame), math.sin(frame)
    angle = poly.vertex_angle(apex)
    diam = poly.diameter()
    eps_v = tol.vertex_rel * diam
    eps_l = tol.line_rel * diam

    diagonals: List[GeneralizedDiagonal] = []
    leaves: List[AngularBeam] = []
    beams = [(0.0, angle, UnfoldingNode(PlanarIsometry.identity(), 0, ()), -1)]
    nodes = 0

    for depth in range(n_max + 1):
        nxt = []
        for lo, hi, node, entry in beams:
            nodes += 1
            if nodes > node_budget:
                partial = BeamResult(apex, n_max, sorted(diagonals, key=lambda g: g.direction),
                                     leaves, False, depth, nodes)
                raise BudgetExceeded(
                    f"node budget {node_budget} exceeded at depth {depth}", partial)
            iso = node.iso
            vs = [iso.apply(v) for v in vs0]
            cuts = []
            for j, (wx, wy) in enumerate(vs):
                rx, ry = wx - a[0], wy - a[1]
                r = math.hypot(rx, ry)
                if r <= eps_v:
                    continue
                th = math.atan2(bx * ry - by * rx, bx * rx + by * ry)
                margin = eps_v / r
                if lo + margin < th < hi - margin:
                    cuts.append((th, r, j))
            if cuts:
                cuts.sort()
                kept = []
                for th, r, j in cuts:
                    if kept and th - kept[-1][0] <= eps_v / r:
                        # collinear vertices: the nearer one is hit first
                        if r < kept[-1][1]:
                            kept[-1] = (th, r, j)
                        continue
                    kept.append((th, r, j))
                cuts = kept
                for th, _, j in cuts:
                    diagonals.append(GeneralizedDiagonal(
                        apex, th, depth, j, vs[j], node.itinerary, frame + th))
            edges = [lo] + [c[0] for c in cuts] + [hi]
            for k in range(len(edges) - 1):
                t0, t1 = edges[k], edges[k + 1]
                mid = 0.5 * (t0 + t1)
                d = (math.cos(frame + mid), math.sin(frame + mid))
                side = _exit_side(vs, a, d, entry, eps_l)
                if depth == n_max:
                    leaves.append(AngularBeam(apex, t0, t1, node, side))
                    continue
                seg = (vs[side], vs[(side + 1) % nv])
                child = UnfoldingNode(reflect_across_segment(iso, seg), depth + 1,
                                      node.itinerary + (side,))
                nxt.append((t0, t1, child, side))
        beams = nxt

    diagonals.sort(key=lambda g: g.direction)
    return BeamResult(apex, n_max, diagonals, leaves, True, n_max, nodes)


def count_Q(shape, apex: int, n: int, **kw) -> int:
    """Number of generalized diagonals from ``apex`` with at most ``n`` reflections."""
    return len(propagate_beams(shape, apex, n, **kw).diagonals)


# -- orbit tracing ------------------------------------------------------------


@dataclass(frozen=True)
class Trace:
    itinerary: Itinerary
    endpoint: Point2
    direction: Point2
    points: Tuple[Point2, ...]
    unfolded_points: Tuple[Point2, ...]
    length: float


@dataclass(frozen=True)
class OrbitVertexHit:
    """The orbit ran into a vertex after ``after`` reflections."""

    after: int
    vertex: int
    itinerary: Itinerary
    points: Tuple[Point2, ...]
    incoming: Point2
    length: float


def _as_unit(direction) -> Point2:
    if isinstance(direction, (int, float)):
        return unit_from_angle(float(direction))
    return unit((float(direction[0]), float(direction[1])))


def trace_orbit(
    shape,
    start: Point2,
    direction,
    n_reflections: int,
    tol: Tolerances = DEFAULT_TOL,
) -> Union[Trace, OrbitVertexHit]:
    """Follow a billiard trajectory for ``n_reflections`` bounces.

    ``direction`` is an absolute angle or a vector. ``points`` starts with
    ``start`` followed by every reflection point; ``unfolded_points`` are the
    same points carried into the development, so they lie on one line.
    """
    poly = polygon_of(shape)
    p = (float(start[0]), float(start[1]))
    d = _as_unit(direction)
    iso = PlanarIsometry.identity()
    itinerary: List[int] = []
    points = [p]
    unfolded = [p]
    length = 0.0
    check = True
    for k in range(n_reflections):
        hit = ray_exit(poly, p, d, tol, check=check)
        check = False
        length += hit.distance
        if isinstance(hit, VertexHit):
            points.append(hit.point)
            return OrbitVertexHit(k, hit.vertex, tuple(itinerary), tuple(points), d, length)
        side = hit.side
        p = hit.point
        points.append(p)
        itinerary.append(side)
        unfolded.append(iso.apply(p))
        iso = reflect_across_segment(iso, (iso.apply(poly.side(side)[0]), iso.apply(poly.side(side)[1])))
        d = reflect_vector(d, poly.side_direction(side))
    return Trace(tuple(itinerary), p, d, tuple(points), tuple(unfolded), length)


def trace_to_vertex(shape, start: Point2, direction, max_reflections: int,
                    tol: Tolerances = DEFAULT_TOL) -> Optional[OrbitVertexHit]:
    """Trace until a vertex is hit within ``max_reflections`` reflections, else ``None``."""
    res = trace_orbit(shape, start, direction, max_reflections + 1, tol)
    return res if isinstance(res, OrbitVertexHit) else None


# -- complexity ---------------------------------------------------------------


def reverse_of(poly: ConvexPolygon, g: GeneralizedDiagonal) -> Tuple[int, int, float]:
    """``(source, reflections, direction)`` of the time-reversed diagonal."""
    a = poly.vertices[g.source]
    w = g.target_vertex_image
    u = unit((w[0] - a[0], w[1] - a[1]))
    # the copy holding the target is the base reflected along the itinerary
    iso = PlanarIsometry.identity()
    for side in g.itinerary:
        s0, s1 = poly.side(side)
        iso = reflect_across_segment(iso, (iso.apply(s0), iso.apply(s1)))
    arrive = iso.inverse_linear(u)
    back = (-arrive[0], -arrive[1])
    frame = poly.vertex_frame(g.target)
    bx, by = math.cos(frame), math.sin(frame)
    theta = math.atan2(bx * back[1] - by * back[0], bx * back[0] + by * back[1])
    return g.target, g.reflections, theta


@dataclass
class ComplexityReport:
    n_max: int
    per_vertex: Dict[int, List[GeneralizedDiagonal]]
    unmatched: int = 0
    complete: bool = True

    def Q(self, vertex: int, n: int) -> int:
        return sum(1 for g in self.per_vertex[vertex] if g.reflections <= n)

    def P(self, n: int, oriented: bool = False) -> int:
        if oriented:
            return sum(self.Q(v, n) for v in self.per_vertex)
        return sum(c for k, c in self._classes_by_length.items() if k <= n)

    _classes_by_length: Dict[int, int] = field(default_factory=dict)


def _count_classes(poly: ConvexPolygon, per_vertex: Dict[int, List[GeneralizedDiagonal]],
                   angle_tol: float) -> Tuple[Dict[int, int], int]:
    """Pair every oriented diagonal with its time reversal; count unoriented classes."""
    index: Dict[Tuple[int, int], Tuple[List[float], List[int]]] = {}
    flat: List[GeneralizedDiagonal] = []
    for v, diags in per_vertex.items():
        for g in diags:
            flat.append(g)
    order = sorted(range(len(flat)), key=lambda i: (flat[i].source, flat[i].reflections, flat[i].direction))
    for i in order:
        g = flat[i]
        key = (g.source, g.reflections)
        thetas, ids = index.setdefault(key, ([], []))
        thetas.append(g.direction)
        ids.append(i)
    partner = [-1] * len(flat)
    unmatched = 0
    for i, g in enumerate(flat):
        src, k, th = reverse_of(poly, g)
        if src not in per_vertex:
            unmatched += 1
            continue
        thetas, ids = index.get((src, k), ([], []))
        pos = bisect.bisect_left(thetas, th - angle_tol)
        best, best_err = -1, angle_tol
        while pos < len(thetas) and thetas[pos] <= th + angle_tol:
            err = abs(thetas[pos] - th)
            if err <= best_err:
                best, best_err = ids[pos], err
            pos += 1
        if best < 0:
            unmatched += 1
        partner[i] = best
    by_len: Dict[int, int] = {}
    for i, g in enumerate(flat):
        j = partner[i]
        # each class counted once: at its smaller member, or alone if unpaired
        if j < 0 or j >= i or partner[j] != i:
            by_len[g.reflections] = by_len.get(g.reflections, 0) + 1
    return by_len, unmatched


def complexity(shape, n_max: int, vertices: Optional[Sequence[int]] = None,
               node_budget: int = DEFAULT_NODE_BUDGET, tol: Tolerances = DEFAULT_TOL,
               angle_tol: float = DEDUP_ANGLE_TOL) -> ComplexityReport:
    """Enumerate diagonals from every vertex up to ``n_max`` reflections.

    The per-vertex budget overrun is re-raised as :class:`BudgetExceeded`
    whose ``partial`` is a :class:`ComplexityReport` flagged incomplete.
    """
    poly = polygon_of(shape)
    verts = list(range(poly.n_sides)) if vertices is None else list(vertices)
    per_vertex: Dict[int, List[GeneralizedDiagonal]] = {}
    for v in verts:
        try:
            per_vertex[v] = propagate_beams(poly, v, n_max, node_budget, tol).diagonals
        except BudgetExceeded as exc:
            per_vertex[v] = exc.partial.diagonals
            rep = ComplexityReport(n_max, per_vertex, complete=False)
            rep._classes_by_length, rep.unmatched = _count_classes(poly, per_vertex, angle_tol)
            raise BudgetExceeded(str(exc), rep) from None
    rep = ComplexityReport(n_max, per_vertex)
    rep._classes_by_length, rep.unmatched = _count_classes(poly, per_vertex, angle_tol)
    return rep


def count_P(shape, n: int, oriented: bool = False, **kw) -> int:
    """Generalized diagonals with at most ``n`` reflections, over all vertices.

    By default an orbit and its time reversal count once.
    """
    return complexity(shape, n, **kw).P(n, oriented=oriented)
