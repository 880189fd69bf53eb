import math
import random

import pytest

from billiardlab.development import (
    OrbitCertificate,
    PeriodicOrbit,
    RotatedFamily,
    certificate_to_billiard_orbit,
    find_periodic_in_beam,
    make_interval,
)
from billiardlab.drag import ParityError, drag_orbit, drag_toward
from billiardlab.geometry import GeometryError, PlanarIsometry, Rhombus, point_on_side
from billiardlab.unfolding import OrbitVertexHit, trace_orbit


def square_bounce():
    sq = Rhombus.square(pose=PlanarIsometry(math.pi / 4))
    start = point_on_side(sq, 2, sq.side_length(2) / 2)
    tr = trace_orbit(sq, start, (0.0, 1.0), 2)
    return sq, PeriodicOrbit(start, (0.0, 1.0), tr.itinerary, 2, tr.length, 0.0)


def test_square_vertical_orbit_dragged_sideways():
    sq, orbit = square_bounce()
    out = drag_orbit(sq, orbit, 0.01, 1000)
    assert out.status == "vertex_encounter"
    assert out.final_orbit.period == 2 and out.final_orbit.itinerary == orbit.itinerary
    assert out.max_residual < 1e-9
    d = out.encounter.diagonal
    assert d.verified and d.reflections >= 0
    # the orbit slides onto a side of the square
    assert d.boundary


def test_drag_toward_picks_sign():
    sq, orbit = square_bounce()
    left = drag_toward(sq, orbit, sq.vertices[1], 0.01, 1000)
    right = drag_toward(sq, orbit, sq.vertices[0], 0.01, 1000)
    assert left.encounter.offset * right.encounter.offset < 0


def test_odd_period_rejected():
    sq, orbit = square_bounce()
    odd = PeriodicOrbit(orbit.start, orbit.direction, orbit.itinerary[:1], 1, orbit.length, 0.0)
    with pytest.raises(ParityError):
        drag_orbit(sq, odd, 0.01, 10)


def test_drag_preserves_closure_until_vertex():
    rng = random.Random(1)
    done = 0
    while done < 5:
        fam = RotatedFamily(Rhombus.from_angle(rng.uniform(0.3, 2.8)), 0)
        j = rng.randrange(4)
        try:
            fr = fam.placement(0, j)
        except GeometryError:
            continue
        w = 0.01 / abs(fr.units[j][1])
        if w >= fam.side_length:
            continue
        s0 = rng.uniform(0, fam.side_length - w)
        cert = find_periodic_in_beam(fam, make_interval(fam, 0, j, s0, s0 + w), 100_000)
        if not isinstance(cert, OrbitCertificate):
            continue
        orbit = certificate_to_billiard_orbit(fam, cert)
        out = drag_orbit(fam.base, orbit, 0.002 * fam.side_length, 20_000)
        done += 1
        assert all(r < 1e-9 for r in out.residuals)
        assert out.encounter is not None
        diag = out.encounter.diagonal
        assert diag.verified
        if not diag.boundary:
            # independent check: the diagonal really ends at a vertex
            res = trace_orbit(fam.base, fam.base.vertices[diag.source], diag.heading, diag.reflections + 1)
            assert isinstance(res, OrbitVertexHit) and res.after == diag.reflections
