"""Planar geometry for right triangles, rhombi and their unfoldings.

Points are plain ``(x, y)`` float tuples. Every polygon is convex and stored
with counterclockwise vertices; side ``i`` runs from vertex ``i`` to vertex
``i + 1``.

Tolerances follow one policy, scaled by the polygon diameter:

* ``vertex_rel`` (default 1e-9) decides whether a boundary hit is a vertex hit;
* ``line_rel`` (default 1e-12) decides on-line tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple, Union

Point2 = Tuple[float, float]
Angle = float


class GeometryError(ValueError):
    """Invalid geometric input (degenerate segment, point outside polygon...)."""


@dataclass(frozen=True)
class Tolerances:
    vertex_rel: float = 1e-9
    line_rel: float = 1e-12

    def __post_init__(self):
        if not (self.vertex_rel > 0 and self.line_rel > 0):
            raise ValueError("tolerances must be positive")


DEFAULT_TOL = Tolerances()


def check_angle(value: float, upper: float = math.pi, name: str = "angle") -> float:
    """Validate an angle lying strictly inside ``(0, upper)``."""
    value = float(value)
    if not math.isfinite(value) or not (0.0 < value < upper):
        raise ValueError(f"{name} must lie in (0, {upper:.6g}), got {value!r}")
    return value


def _check_point(p) -> Point2:
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise GeometryError(f"non-finite point {p!r}")
    return (x, y)


def cross(a: Point2, b: Point2) -> float:
    return a[0] * b[1] - a[1] * b[0]


def dot(a: Point2, b: Point2) -> float:
    return a[0] * b[0] + a[1] * b[1]


def sub(a: Point2, b: Point2) -> Point2:
    return (a[0] - b[0], a[1] - b[1])


def norm(a: Point2) -> float:
    return math.hypot(a[0], a[1])


def unit(a: Point2) -> Point2:
    n = math.hypot(a[0], a[1])
    if n == 0.0:
        raise GeometryError("zero vector has no direction")
    return (a[0] / n, a[1] / n)


def unit_from_angle(theta: float) -> Point2:
    return (math.cos(theta), math.sin(theta))


def reflect_vector(d: Point2, side_dir: Point2) -> Point2:
    """Mirror a vector across a line with (unit) direction ``side_dir``."""
    k = 2.0 * dot(d, side_dir)
    return (k * side_dir[0] - d[0], k * side_dir[1] - d[1])


@dataclass(frozen=True)
class PlanarIsometry:
    """Rigid motion ``p -> R(rotation) F p + translation``.

    ``F`` is the identity when ``orientation == 1`` and the reflection
    ``(x, y) -> (x, -y)`` when ``orientation == -1``.
    """

    rotation: float = 0.0
    translation: Point2 = (0.0, 0.0)
    orientation: int = 1
    _c: float = field(init=False, repr=False, compare=False)
    _s: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        object.__setattr__(self, "_c", math.cos(self.rotation))
        object.__setattr__(self, "_s", math.sin(self.rotation))

    @classmethod
    def identity(cls) -> "PlanarIsometry":
        return cls()

    @classmethod
    def reflection(cls, a: Point2, b: Point2) -> "PlanarIsometry":
        """Reflection across the line through ``a`` and ``b``."""
        d = sub(b, a)
        if norm(d) == 0.0:
            raise GeometryError("degenerate segment: endpoints coincide")
        phi = math.atan2(d[1], d[0])
        refl = cls(2.0 * phi, (0.0, 0.0), -1)
        fa = refl.apply(a)
        return cls(2.0 * phi, (a[0] - fa[0], a[1] - fa[1]), -1)

    def linear(self, v: Point2) -> Point2:
        x, y = v[0], v[1] * self.orientation
        return (self._c * x - self._s * y, self._s * x + self._c * y)

    def apply(self, p: Point2) -> Point2:
        x, y = self.linear(p)
        return (x + self.translation[0], y + self.translation[1])

    def compose(self, other: "PlanarIsometry") -> "PlanarIsometry":
        """Return ``self o other`` (apply ``other`` first)."""
        t = self.apply(other.translation)
        return PlanarIsometry(
            self.rotation + self.orientation * other.rotation,
            t,
            self.orientation * other.orientation,
        )

    def inverse(self) -> "PlanarIsometry":
        rot = -self.rotation if self.orientation == 1 else self.rotation
        inv_lin = PlanarIsometry(rot, (0.0, 0.0), self.orientation)
        tx, ty = inv_lin.linear(self.translation)
        return PlanarIsometry(rot, (-tx, -ty), self.orientation)

    def inverse_linear(self, v: Point2) -> Point2:
        # R F is orthogonal, so its inverse is its transpose
        x = self._c * v[0] + self._s * v[1]
        y = -self._s * v[0] + self._c * v[1]
        return (x, y * self.orientation)

    def inverse_apply(self, p: Point2) -> Point2:
        return self.inverse_linear((p[0] - self.translation[0], p[1] - self.translation[1]))


def reflect_across_segment(iso: PlanarIsometry, seg: Tuple[Point2, Point2]) -> PlanarIsometry:
    """Compose ``iso`` with the reflection across the supporting line of ``seg``."""
    a, b = _check_point(seg[0]), _check_point(seg[1])
    return PlanarIsometry.reflection(a, b).compose(iso)


class ConvexPolygon:
    """A convex polygon with counterclockwise vertices.

    Subclasses only need to provide ``vertices``; everything else (sides,
    inward normals, vertex angles, diameter) is derived here.
    """

    vertices: Tuple[Point2, ...]

    @property
    def n_sides(self) -> int:
        return len(self.vertices)

    def side(self, i: int) -> Tuple[Point2, Point2]:
        vs = self.vertices
        return vs[i], vs[(i + 1) % len(vs)]

    def side_direction(self, i: int) -> Point2:
        a, b = self.side(i)
        return unit(sub(b, a))

    def side_length(self, i: int) -> float:
        a, b = self.side(i)
        return norm(sub(b, a))

    def inward_normal(self, i: int) -> Point2:
        dx, dy = self.side_direction(i)
        return (-dy, dx)

    def diameter(self) -> float:
        d = self.__dict__.get("_diameter")
        if d is None:
            vs = self.vertices
            d = max(norm(sub(p, q)) for p in vs for q in vs)
            self.__dict__["_diameter"] = d
        return d

    def vertex_angle(self, i: int) -> float:
        vs = self.vertices
        n = len(vs)
        p, prev, nxt = vs[i], vs[(i - 1) % n], vs[(i + 1) % n]
        u, w = sub(nxt, p), sub(prev, p)
        return math.atan2(abs(cross(u, w)), dot(u, w))

    def vertex_frame(self, i: int) -> float:
        """Absolute angle of the clockwise-most direction of the vertex sector.

        Directions leaving vertex ``i`` into the polygon are
        ``frame + theta`` for ``theta`` in ``(0, vertex_angle(i))``; the
        sector starts along the side towards the next vertex and sweeps
        counterclockwise to the side towards the previous one.
        """
        vs = self.vertices
        p, nxt = vs[i], vs[(i + 1) % len(vs)]
        d = sub(nxt, p)
        return math.atan2(d[1], d[0])

    def vertex_eps(self, tol: Tolerances = DEFAULT_TOL) -> float:
        return tol.vertex_rel * self.diameter()

    def line_eps(self, tol: Tolerances = DEFAULT_TOL) -> float:
        return tol.line_rel * self.diameter()

    def contains(self, p: Point2, tol: Tolerances = DEFAULT_TOL) -> bool:
        eps = self.line_eps(tol)
        for i in range(self.n_sides):
            a, _ = self.side(i)
            if dot(sub(p, a), self.inward_normal(i)) < -eps:
                return False
        return True


@dataclass(frozen=True)
class Polygon(ConvexPolygon):
    """Arbitrary convex polygon given by its counterclockwise vertices."""

    vertices: Tuple[Point2, ...]

    def __post_init__(self):
        vs = tuple(_check_point(p) for p in self.vertices)
        if len(vs) < 3:
            raise GeometryError("polygon needs at least three vertices")
        object.__setattr__(self, "vertices", vs)
        for i in range(len(vs)):
            a, b, c = vs[i], vs[(i + 1) % len(vs)], vs[(i + 2) % len(vs)]
            if cross(sub(b, a), sub(c, b)) <= 0:
                raise GeometryError("vertices must be strictly convex and counterclockwise")


@dataclass(frozen=True)
class Rhombus(ConvexPolygon):
    """Rhombus with half-diagonals along the local x and y axes.

    Local vertex ids: 0 = (h, 0), 1 = (0, v), 2 = (-h, 0), 3 = (0, -v);
    ``pose`` maps local coordinates to the plane.
    """

    half_diagonal_h: float
    half_diagonal_v: float
    pose: PlanarIsometry = field(default_factory=PlanarIsometry.identity)

    def __post_init__(self):
        if not (self.half_diagonal_h > 0 and self.half_diagonal_v > 0):
            raise ValueError("half-diagonals must be positive")
        h, v = float(self.half_diagonal_h), float(self.half_diagonal_v)
        local = ((h, 0.0), (0.0, v), (-h, 0.0), (0.0, -v))
        pts = tuple(self.pose.apply(p) for p in local)
        if self.pose.orientation == -1:
            # keep counterclockwise order; relabelling would break the local ids,
            # so mirrored poses are rejected instead
            raise GeometryError("rhombus pose must preserve orientation")
        object.__setattr__(self, "vertices", pts)

    @classmethod
    def square(cls, half_diagonal: float = 1.0, pose: PlanarIsometry | None = None) -> "Rhombus":
        return cls(half_diagonal, half_diagonal, pose or PlanarIsometry.identity())

    @classmethod
    def from_angle(cls, angle_h: float, side: float = 1.0, pose: PlanarIsometry | None = None) -> "Rhombus":
        """Rhombus whose horizontal-axis vertices have angle ``angle_h``."""
        check_angle(angle_h)
        half = angle_h / 2.0
        return cls(side * math.cos(half), side * math.sin(half), pose or PlanarIsometry.identity())

    @property
    def angle_h(self) -> float:
        """Vertex angle at the horizontal-axis vertices (ids 0 and 2)."""
        return 2.0 * math.atan2(self.half_diagonal_v, self.half_diagonal_h)

    @property
    def center(self) -> Point2:
        return self.pose.translation


@dataclass(frozen=True)
class RightTriangle(ConvexPolygon):
    """Right triangle with right angle at vertex 0 = (0, 0).

    Vertex 1 = (leg_adjacent, 0) carries ``acute_angle``; vertex 2 sits on
    the y-axis.
    """

    acute_angle: float
    leg_adjacent: float = 1.0

    def __post_init__(self):
        check_angle(self.acute_angle, math.pi / 2, "acute_angle")
        if not self.leg_adjacent > 0:
            raise ValueError("leg_adjacent must be positive")
        a = self.leg_adjacent
        pts = ((0.0, 0.0), (a, 0.0), (0.0, a * math.tan(self.acute_angle)))
        object.__setattr__(self, "vertices", pts)

    @property
    def leg_opposite(self) -> float:
        return self.leg_adjacent * math.tan(self.acute_angle)

    @property
    def angles(self) -> Tuple[float, float, float]:
        return (math.pi / 2, self.acute_angle, math.pi / 2 - self.acute_angle)


def triangle_to_rhombus(t: RightTriangle) -> Rhombus:
    """Unfold a right triangle three times about its right angle.

    The result is centred on the right-angle vertex, with the adjacent leg
    along the local x-axis, so vertex 0 of the rhombus is vertex 1 of ``t``.
    """
    return Rhombus(t.leg_adjacent, t.leg_opposite)


# -- ray casting --------------------------------------------------------------


@dataclass(frozen=True)
class SideHit:
    side: int
    point: Point2
    distance: float


@dataclass(frozen=True)
class VertexHit:
    vertex: int
    point: Point2
    distance: float


def _classify_origin(poly: ConvexPolygon, origin: Point2, direction: Point2, eps_line: float):
    """Return the sides containing ``origin``; raise if outside or pointing out."""
    on_sides = []
    for i in range(poly.n_sides):
        a, _ = poly.side(i)
        nrm = poly.inward_normal(i)
        dist = dot(sub(origin, a), nrm)
        if dist < -eps_line:
            raise GeometryError(f"origin {origin} lies outside the polygon")
        if dist <= eps_line:
            on_sides.append(i)
            if dot(direction, nrm) < -1e-12:
                raise GeometryError("direction points outward from the boundary")
    return on_sides


def ray_exit(
    poly: ConvexPolygon,
    origin: Point2,
    direction: Point2,
    tol: Tolerances = DEFAULT_TOL,
    check: bool = True,
) -> Union[SideHit, VertexHit]:
    """First boundary point hit by the ray ``origin + t * direction``, ``t > 0``.

    ``direction`` must be a unit vector. A hit within the vertex tolerance of
    a vertex is reported as :class:`VertexHit` and never continued.
    """
    diam = poly.diameter()
    eps_line = tol.line_rel * diam
    eps_vertex = tol.vertex_rel * diam
    if check:
        _classify_origin(poly, origin, direction, eps_line)
    ox, oy = origin
    dx, dy = direction
    best_t = math.inf
    best_side = -1
    vs = poly.vertices
    n = len(vs)
    for i in range(n):
        ax, ay = vs[i]
        bx, by = vs[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        denom = dx * ey - dy * ex
        if denom == 0.0:
            continue
        wx, wy = ax - ox, ay - oy
        t = (wx * ey - wy * ex) / denom
        if t <= eps_line:
            continue
        u = (wx * dy - wy * dx) / denom
        slack = eps_vertex / math.hypot(ex, ey)
        if -slack <= u <= 1.0 + slack and t < best_t:
            best_t, best_side = t, i
    if best_side < 0:
        raise GeometryError("ray does not leave the polygon (origin outside?)")
    hit = (ox + best_t * dx, oy + best_t * dy)
    for j, v in enumerate(vs):
        if math.hypot(hit[0] - v[0], hit[1] - v[1]) <= eps_vertex:
            return VertexHit(j, v, best_t)
    return SideHit(best_side, hit, best_t)


def point_on_side(poly: ConvexPolygon, side: int, s: float) -> Point2:
    """Point at arc length ``s`` from the start vertex of ``side``."""
    a, _ = poly.side(side)
    d = poly.side_direction(side)
    return (a[0] + s * d[0], a[1] + s * d[1])


def polygon_of(shape) -> ConvexPolygon:
    """Accept a rhombus, right triangle, polygon, or vertex sequence."""
    if isinstance(shape, ConvexPolygon):
        return shape
    if isinstance(shape, Sequence):
        return Polygon(tuple(shape))
    raise TypeError(f"cannot interpret {type(shape).__name__} as a polygon")
