"""Development map on the family of rotated rhombi.

``R_k`` is the base rhombus turned by ``k * alpha`` about its centre, where
``alpha`` is the angle at the chosen vertex pair. A point of ``X_k`` (the two
sides of ``R_k`` into which the horizontal vector points) is sent by a
horizontal ray to the opposite boundary; reflecting the copy across the side
that was hit gives a translate of ``R_{k-1}`` or ``R_{k+1}``.

Points are stored intrinsically as ``(level, side, s)``: ``side`` is the base
rhombus label and ``s`` the arc length from its start vertex. At level ``k``
the copy carrying ``side`` on its left has linear part
``R(k alpha + rho + eps pi) F^k`` with ``eps`` in {0, 1} fixed by that
requirement; this is exactly the linear part reached by unfolding, so two
visits with equal ``(level, side)`` lie in copies that differ by a
translation only.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from .geometry import (
    DEFAULT_TOL,
    GeometryError,
    PlanarIsometry,
    Point2,
    Rhombus,
    Tolerances,
    VertexHit,
)
from .unfolding import OrbitVertexHit, Trace, trace_orbit


@dataclass(frozen=True)
class _Frame:
    """World vertices of one placed copy, centred at the origin."""

    rotation: float
    orientation: int
    verts: Tuple[Point2, ...]
    units: Tuple[Point2, ...]

    @property
    def iso(self) -> PlanarIsometry:
        return PlanarIsometry(self.rotation, (0.0, 0.0), self.orientation)


@dataclass(frozen=True)
class RotatedFamily:
    """Rhombi ``R_k`` = ``base`` turned by ``k * alpha``; ``pair`` 0 puts A at vertex 0, 1 at vertex 1."""

    base: Rhombus
    pair: int = 0
    tol: Tolerances = DEFAULT_TOL
    _cache: Dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.pair not in (0, 1):
            raise ValueError("pair must be 0 (vertices 0, 2) or 1 (vertices 1, 3)")

    @property
    def alpha(self) -> float:
        a = self.base.angle_h
        return a if self.pair == 0 else math.pi - a

    @property
    def side_length(self) -> float:
        return math.hypot(self.base.half_diagonal_h, self.base.half_diagonal_v)

    @property
    def eps_vertex(self) -> float:
        return self.tol.vertex_rel * self.base.diameter()

    def rational_flag(self, max_q: int = 10**6) -> bool:
        """True when ``alpha / pi`` is within float precision of a fraction with denominator <= max_q."""
        from .rotation import cf_expand

        cf = cf_expand(self.alpha / math.pi, 64)
        return cf.truncated and cf.q[-1] <= max_q

    def local_vertices(self) -> Tuple[Point2, ...]:
        h, v = self.base.half_diagonal_h, self.base.half_diagonal_v
        return ((h, 0.0), (0.0, v), (-h, 0.0), (0.0, -v))

    def frame(self, level: int, flip: int) -> _Frame:
        key = (level, flip)
        fr = self._cache.get(key)
        if fr is None:
            rot = level * self.alpha + self.base.pose.rotation + flip * math.pi
            orient = 1 if level % 2 == 0 else -1
            iso = PlanarIsometry(rot, (0.0, 0.0), orient)
            verts = tuple(iso.apply(p) for p in self.local_vertices())
            units = []
            for i in range(4):
                a, b = verts[i], verts[(i + 1) % 4]
                ln = math.hypot(b[0] - a[0], b[1] - a[1])
                units.append(((b[0] - a[0]) / ln, (b[1] - a[1]) / ln))
            fr = _Frame(rot, orient, verts, tuple(units))
            self._cache[key] = fr
        return fr

    def _inward_x(self, fr: _Frame, side: int) -> float:
        # interior lies to the left of a side for orientation +1, to the right for -1
        ux, uy = fr.units[side]
        return -uy * fr.orientation

    def placement(self, level: int, side: int, facing: int = 1) -> _Frame:
        """Copy at ``level`` whose ``side`` faces left (``facing=1``) or right (``-1``)."""
        for flip in (0, 1):
            fr = self.frame(level, flip)
            if self._inward_x(fr, side) * facing > 0:
                return fr
        raise GeometryError(f"side {side} is horizontal at level {level}")

    def level_delta(self, level: int, side: int) -> int:
        """Level change when the copy at ``level`` is reflected across ``side``."""
        orient = 1 if level % 2 == 0 else -1
        sigma = 1 if side % 2 else -1
        return orient * sigma * (1 if self.pair == 0 else -1)


@dataclass(frozen=True)
class DevPoint:
    level: int
    side: int
    s: float


@dataclass(frozen=True)
class DevStep:
    point: DevPoint
    level_delta: int
    travel: float


def _height(fr: _Frame, side: int, s: float) -> float:
    return fr.verts[side][1] + s * fr.units[side][1]


def _world(fr: _Frame, side: int, s: float) -> Point2:
    a, u = fr.verts[side], fr.units[side]
    return (a[0] + s * u[0], a[1] + s * u[1])


def _extreme(fr: _Frame, sign: int) -> int:
    """Vertex shared by the two sides facing ``sign`` (+1 right, -1 left).

    A horizontal ray travelling in direction ``sign`` exits through one of
    these two sides; at the height of this vertex it hits the vertex itself.
    """
    facing = [-fr.units[i][1] * fr.orientation * sign < 0 for i in range(4)]
    for i in range(4):
        if facing[i] and facing[(i - 1) % 4]:
            return i
    raise GeometryError("a side is horizontal: no well-defined exit chain")


def _side_at_height(fr: _Frame, apex: int, y: float) -> int:
    """Of the two sides at vertex ``apex``, the one spanning height ``y``."""
    a, b = fr.verts[apex], fr.verts[(apex + 1) % 4]
    lo, hi = min(a[1], b[1]), max(a[1], b[1])
    return apex if lo <= y <= hi else (apex - 1) % 4


def _shoot(fam: RotatedFamily, fr: _Frame, y: float, x0: float, sign: int):
    """Horizontal ray at height ``y`` from abscissa ``x0`` in direction ``sign``."""
    apex = _extreme(fr, sign)
    vy = fr.verts[apex][1]
    if abs(y - vy) <= fam.eps_vertex:
        return VertexHit(apex, fr.verts[apex], abs(fr.verts[apex][0] - x0))
    ys = [p[1] for p in fr.verts]
    if not min(ys) - fam.eps_vertex <= y <= max(ys) + fam.eps_vertex:
        raise GeometryError("point lies outside the vertical range of its rhombus")
    m = _side_at_height(fr, apex, y)
    uy = fr.units[m][1]
    s = (y - fr.verts[m][1]) / uy
    x = fr.verts[m][0] + s * fr.units[m][0]
    return m, s, abs(x - x0)


def dev_step(fam: RotatedFamily, x: DevPoint) -> Union[DevStep, VertexHit]:
    """One application of the development map."""
    fr = fam.placement(x.level, x.side)
    y = _height(fr, x.side, x.s)
    x0 = _world(fr, x.side, x.s)[0]
    hit = _shoot(fam, fr, y, x0, 1)
    if isinstance(hit, VertexHit):
        return hit
    m, s, travel = hit
    delta = fam.level_delta(x.level, m)
    return DevStep(DevPoint(x.level + delta, m, s), delta, travel)


def inverse_step(fam: RotatedFamily, x: DevPoint) -> Union[DevStep, VertexHit]:
    """Preimage of ``x`` under :func:`dev_step`."""
    # the previous copy is the current one reflected across x.side, whose
    # level differs by the delta of that reflection seen from the old level
    prev_parity = 1 if (x.level - 1) % 2 == 0 else -1
    sigma = 1 if x.side % 2 else -1
    delta = prev_parity * sigma * (1 if fam.pair == 0 else -1)
    level = x.level - delta
    fr = fam.placement(level, x.side, facing=-1)
    y = _height(fr, x.side, x.s)
    x0 = _world(fr, x.side, x.s)[0]
    hit = _shoot(fam, fr, y, x0, -1)
    if isinstance(hit, VertexHit):
        return hit
    j, s, travel = hit
    return DevStep(DevPoint(level, j, s), -delta, travel)


# -- measured intervals -------------------------------------------------------


@dataclass(frozen=True)
class BeamInterval:
    level: int
    side: int
    s_lo: float
    s_hi: float
    mu: float = 0.0

    def point(self, t: float) -> DevPoint:
        return DevPoint(self.level, self.side, self.s_lo + t * (self.s_hi - self.s_lo))


def make_interval(fam: RotatedFamily, level: int, side: int, s_lo: float, s_hi: float) -> BeamInterval:
    if s_hi < s_lo:
        s_lo, s_hi = s_hi, s_lo
    fr = fam.placement(level, side)
    return BeamInterval(level, side, s_lo, s_hi, (s_hi - s_lo) * abs(fr.units[side][1]))


def lambda_measure(fam: RotatedFamily, interval: BeamInterval) -> float:
    """Length of the vertical projection of the interval."""
    fr = fam.placement(interval.level, interval.side)
    return abs(_height(fr, interval.side, interval.s_hi) - _height(fr, interval.side, interval.s_lo))


def lambda_level(fam: RotatedFamily, level: int) -> float:
    """``lambda(X_k)``: the vertical extent of the rhombus at this level."""
    ys = [p[1] for p in fam.frame(level, 0).verts]
    return max(ys) - min(ys)


def gap_extents(fam: RotatedFamily, level: int) -> Tuple[float, float]:
    """Vertical widths of the parts of ``X_k`` sent to level ``k+1`` and to ``k-1``.

    A horizontal ray leaves ``R_k`` through a right-facing side; each such side
    sends its whole vertical span to one neighbouring level. Horizontal sides
    face neither way and contribute nothing.
    """
    fr = fam.frame(level, 0)
    up = down = 0.0
    for side in range(4):
        if -fr.units[side][1] * fr.orientation >= 0:
            continue
        width = abs(fr.verts[(side + 1) % 4][1] - fr.verts[side][1])
        if fam.level_delta(level, side) > 0:
            up += width
        else:
            down += width
    return up, down


@dataclass(frozen=True)
class SplitEvent:
    at_step: int
    vertex: int
    vertex_fraction: float
    images: Tuple[BeamInterval, ...] = ()


def _push(fam: RotatedFamily, I: BeamInterval) -> Union[Tuple[BeamInterval, int, float, int, float], SplitEvent]:
    fr = fam.placement(I.level, I.side)
    y0, y1 = _height(fr, I.side, I.s_lo), _height(fr, I.side, I.s_hi)
    lo, hi = min(y0, y1), max(y0, y1)
    apex = _extreme(fr, 1)
    vy = fr.verts[apex][1]
    eps = fam.eps_vertex
    if lo - eps <= vy <= hi + eps:
        frac = (vy - lo) / (hi - lo) if hi > lo else 0.5
        return SplitEvent(0, apex, frac)
    m = _side_at_height(fr, apex, 0.5 * (lo + hi))
    uy = fr.units[m][1]
    a = (y0 - fr.verts[m][1]) / uy
    b = (y1 - fr.verts[m][1]) / uy
    delta = fam.level_delta(I.level, m)
    nxt = make_interval(fam, I.level + delta, m, a, b)
    return nxt, m, delta, apex, vy


def evolve_interval(fam: RotatedFamily, I: BeamInterval, steps: int):
    """Images ``[(I_1, a_1), ..., (I_steps, a_steps)]`` or a :class:`SplitEvent`."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    out: List[Tuple[BeamInterval, int]] = []
    cur = I
    for step in range(1, steps + 1):
        res = _push(fam, cur)
        if isinstance(res, SplitEvent):
            return SplitEvent(step, res.vertex, res.vertex_fraction, tuple(b for b, _ in out))
        cur = res[0]
        out.append((cur, cur.level))
    return out


# -- periodic orbits inside a parallel beam -----------------------------------


@dataclass(frozen=True)
class PeriodicOrbit:
    start: Point2
    direction: Point2
    itinerary: Tuple[int, ...]
    period: int
    length: float
    closure_residual: float


@dataclass(frozen=True)
class OrbitCertificate:
    p: int
    q: int
    point: DevPoint
    period: int
    parity: str
    displacement: Point2
    itinerary: Tuple[int, ...]
    closure_residual: float = math.nan
    length: float = math.nan
    window_measure: float = math.nan
    pigeonhole_bound: int = 0

    def as_record(self) -> dict:
        return {
            "p": self.p, "q": self.q, "level": self.point.level, "side": self.point.side,
            "s": self.point.s, "period": self.period, "parity": self.parity,
            "closure_residual": self.closure_residual, "length": self.length,
            "window_measure": self.window_measure, "pigeonhole_bound": self.pigeonhole_bound,
        }


@dataclass
class NotFound:
    steps: int
    reason: str = "max_steps"


def t_bound(fam: RotatedFamily, mu: float, C: Optional[float] = None, eps: float = 0.1) -> float:
    """Beam length ``C / mu^(3+eps)`` after which an orbit is expected; ``C`` defaults to ``4 lambda(X_0)``."""
    if C is None:
        C = 4.0 * lambda_level(fam, 0)
    return C / mu ** (3.0 + eps)


def _base_point(fam: RotatedFamily, side: int, s: float) -> Point2:
    vs = fam.local_vertices()
    a, b = vs[side], vs[(side + 1) % 4]
    ln = math.hypot(b[0] - a[0], b[1] - a[1])
    return (a[0] + s * (b[0] - a[0]) / ln, a[1] + s * (b[1] - a[1]) / ln)


def certificate_to_billiard_orbit(fam: RotatedFamily, cert: OrbitCertificate) -> PeriodicOrbit:
    """Fold the closed segment of a certificate back into the base rhombus and re-trace it."""
    fr = fam.placement(cert.point.level, cert.point.side)
    local_dir = fr.iso.inverse_linear(cert.displacement)
    pose = fam.base.pose
    start = pose.apply(_base_point(fam, cert.point.side, cert.point.s))
    d = pose.linear(local_dir)
    ln = math.hypot(*d)
    d = (d[0] / ln, d[1] / ln)
    res = trace_orbit(fam.base, start, d, cert.period, fam.tol)
    if isinstance(res, OrbitVertexHit):
        raise GeometryError(f"certificate orbit meets vertex {res.vertex} after {res.after} reflections")
    return PeriodicOrbit(start, d, res.itinerary, cert.period, res.length, closure_residual(res, start, d))


def closure_residual(tr: Trace, start: Point2, direction: Point2) -> float:
    """Position gap plus the length-weighted direction gap after one period."""
    dp = math.hypot(tr.endpoint[0] - start[0], tr.endpoint[1] - start[1])
    du = math.hypot(tr.direction[0] - direction[0], tr.direction[1] - direction[1])
    return dp + tr.length * du


def find_periodic_in_beam(fam: RotatedFamily, I: BeamInterval, max_steps: int,
                          overlap_tol: Optional[float] = None):
    """Push ``I`` until two images at the same level and side overlap.

    The closed segment joins the same intrinsic point in the two copies;
    those copies differ by a translation, so its fold is a periodic orbit.
    Returns an :class:`OrbitCertificate` (re-simulated), :class:`NotFound`
    after ``max_steps`` pushes, or the :class:`SplitEvent` that ended the beam.
    """
    if I.mu <= 0 and lambda_measure(fam, I) <= 0:
        raise ValueError("interval must have positive measure")
    tol = overlap_tol if overlap_tol is not None else 1e-12 * fam.side_length
    seen: Dict[Tuple[int, int], List[Tuple[float, float, int]]] = {}
    translations: List[Point2] = [(0.0, 0.0)]
    sides: List[int] = []
    window = 0.0
    cur = I
    for step in range(max_steps + 1):
        key = (cur.level, cur.side)
        rows = seen.setdefault(key, [])
        if not rows:
            fr0 = fam.placement(cur.level, cur.side)
            window += fam.side_length * abs(fr0.units[cur.side][1])
        pos = bisect.bisect_left(rows, (cur.s_hi, math.inf, 0))
        hits = []
        k = pos - 1
        while k >= 0 and rows[k][1] > cur.s_lo:
            ov = min(rows[k][1], cur.s_hi) - max(rows[k][0], cur.s_lo)
            if ov > tol:
                hits.append(rows[k])
            k -= 1
        if hits:
            lo_p, hi_p, p = min(hits, key=lambda r: r[2])
            s_star = 0.5 * (max(lo_p, cur.s_lo) + min(hi_p, cur.s_hi))
            period = step - p
            tp, tq = translations[p], translations[step]
            disp = (tq[0] - tp[0], tq[1] - tp[1])
            parity = "even" if period % 2 == 0 else "odd"
            # equal level means equal orientation, hence an even number of reflections
            assert parity == "even", "odd period at equal level: bookkeeping bug"
            mu = lambda_measure(fam, I)
            cert = OrbitCertificate(p, step, DevPoint(cur.level, cur.side, s_star), period, parity,
                                    disp, tuple(sides[p:step]), window_measure=window,
                                    pigeonhole_bound=math.ceil(window / mu) + 1)
            orbit = certificate_to_billiard_orbit(fam, cert)
            return OrbitCertificate(**{**cert.__dict__, "closure_residual": orbit.closure_residual,
                                       "length": orbit.length})
        bisect.insort(rows, (cur.s_lo, cur.s_hi, step))
        if step == max_steps:
            break
        res = _push(fam, cur)
        if isinstance(res, SplitEvent):
            return SplitEvent(step + 1, res.vertex, res.vertex_fraction)
        nxt, m, _, _, _ = res
        fr_old = fam.placement(cur.level, cur.side)
        fr_new = fam.placement(nxt.level, m)
        # the shared side m fixes the new translation
        a_old, a_new = fr_old.verts[m], fr_new.verts[m]
        t = translations[-1]
        translations.append((t[0] + a_old[0] - a_new[0], t[1] + a_old[1] - a_new[1]))
        sides.append(m)
        cur = nxt
    return NotFound(max_steps)
