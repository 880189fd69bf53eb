import math
import random

import pytest

from billiardlab.development import (
    DevPoint,
    NotFound,
    OrbitCertificate,
    RotatedFamily,
    SplitEvent,
    certificate_to_billiard_orbit,
    dev_step,
    evolve_interval,
    find_periodic_in_beam,
    gap_extents,
    inverse_step,
    lambda_level,
    lambda_measure,
    make_interval,
    t_bound,
)
from billiardlab.geometry import GeometryError, PlanarIsometry, Rhombus, VertexHit, reflect_across_segment
from billiardlab.unfolding import Trace, trace_orbit


def axis_square():
    return Rhombus.square(half_diagonal=math.sqrt(0.5), pose=PlanarIsometry(math.pi / 4))


def random_beam(rng, mu):
    """A seeded family and a left-side interval of vertical measure ``mu``."""
    while True:
        fam = RotatedFamily(Rhombus.from_angle(rng.uniform(0.3, 2.8)), 0)
        j = rng.randrange(4)
        try:
            fr = fam.placement(0, j)
        except GeometryError:
            continue
        w = mu / abs(fr.units[j][1])
        if w >= fam.side_length:
            continue
        s0 = rng.uniform(0, fam.side_length - w)
        return fam, make_interval(fam, 0, j, s0, s0 + w)


def test_square_single_step():
    fam = RotatedFamily(axis_square())
    # side 1 is the left side of the axis-aligned square
    st = dev_step(fam, DevPoint(0, 1, 0.5))
    assert st.point.side == 3
    assert st.point.s == pytest.approx(0.5, abs=1e-12)
    assert st.travel == pytest.approx(1.0, abs=1e-12)
    assert st.level_delta == fam.level_delta(0, 3) == 1


def test_step_inverse_identity():
    rng = random.Random(3)
    fam = RotatedFamily(Rhombus.from_angle(1.234567), 0)
    checked = 0
    for _ in range(1000):
        k, j = rng.randint(-50, 50), rng.randrange(4)
        try:
            fam.placement(k, j)
        except GeometryError:
            continue
        x = DevPoint(k, j, rng.uniform(0, fam.side_length))
        st = dev_step(fam, x)
        if isinstance(st, VertexHit):
            continue
        back = inverse_step(fam, st.point)
        assert (back.point.level, back.point.side) == (k, j)
        assert abs(back.point.s - x.s) < 1e-10
        assert abs(st.level_delta) == 1
        checked += 1
    assert checked > 900


def test_level_change_matches_reflection():
    rng = random.Random(4)
    fam = RotatedFamily(Rhombus.from_angle(2.2), 1)
    for _ in range(200):
        k, j = rng.randint(-20, 20), rng.randrange(4)
        try:
            fr = fam.placement(k, j)
        except GeometryError:
            continue
        st = dev_step(fam, DevPoint(k, j, rng.uniform(0, fam.side_length)))
        if isinstance(st, VertexHit):
            continue
        m = st.point.side
        refl = reflect_across_segment(fr.iso, (fr.verts[m], fr.verts[(m + 1) % 4]))
        nxt = fam.placement(st.point.level, m)
        for v in [(1.0, 0.0), (0.0, 1.0)]:
            a, b = refl.linear(v), nxt.iso.linear(v)
            assert math.hypot(a[0] - b[0], a[1] - b[1]) < 1e-9


def test_ray_into_vertex():
    fam = RotatedFamily(Rhombus.from_angle(1.0))
    # from the left vertex along the horizontal diagonal
    hit = dev_step(fam, DevPoint(0, 2, 0.0))
    assert isinstance(hit, VertexHit) and hit.vertex == 0


def test_lambda_of_vertical_diagonal_square():
    fam = RotatedFamily(Rhombus.square(half_diagonal=math.sqrt(0.5)))
    assert lambda_level(fam, 0) == pytest.approx(math.sqrt(2), abs=1e-12)


def test_lambda_zero_and_additive():
    fam = RotatedFamily(Rhombus.from_angle(1.1))
    assert lambda_measure(fam, make_interval(fam, 0, 1, 0.3, 0.3)) == 0.0
    whole = lambda_measure(fam, make_interval(fam, 0, 1, 0.1, 0.7))
    parts = lambda_measure(fam, make_interval(fam, 0, 1, 0.1, 0.45)) + \
        lambda_measure(fam, make_interval(fam, 0, 1, 0.45, 0.7))
    assert whole == pytest.approx(parts, abs=1e-15)


def test_measure_preserved_and_levels_walk():
    rng = random.Random(8)
    for _ in range(20):
        fam, I = random_beam(rng, 1e-4)
        out = evolve_interval(fam, I, 200)
        if isinstance(out, SplitEvent):
            out = [(b, b.level) for b in out.images]
        lvl = I.level
        for J, a in out:
            assert abs(lambda_measure(fam, J) - I.mu) < 1e-12
            assert abs(a - lvl) == 1
            lvl = a


def test_split_at_step_one():
    fam = RotatedFamily(Rhombus.from_angle(1.0))
    # the horizontal diagonal through the left vertex runs into the right one
    I = make_interval(fam, 0, 2, 0.0, 0.1)
    res = evolve_interval(fam, I, 5)
    assert isinstance(res, SplitEvent) and res.at_step == 1 and res.vertex == 0


def test_gap_extents_sum():
    fam = RotatedFamily(Rhombus.from_angle(0.7777))
    for k in range(-30, 31):
        up, down = gap_extents(fam, k)
        assert up + down == pytest.approx(lambda_level(fam, k), abs=1e-12)


def test_gap_extents_shrink_with_range():
    fam = RotatedFamily(Rhombus.from_angle(1.0 + math.sqrt(2) / 10))
    mins = [min(gap_extents(fam, k)[0] for k in range(-K, K + 1)) for K in (10, 100, 1000)]
    assert mins[0] >= mins[1] >= mins[2]
    assert mins[2] < mins[0]


def test_horizontal_side_contributes_nothing():
    fam = RotatedFamily(axis_square())
    up, down = gap_extents(fam, 0)
    assert min(up, down) < 1e-12
    assert up + down == pytest.approx(1.0, abs=1e-12)


def test_beam_search_certificates():
    rng = random.Random(1)
    found = 0
    for _ in range(15):
        fam, I = random_beam(rng, 0.01)
        r = find_periodic_in_beam(fam, I, 100_000)
        assert isinstance(r, (OrbitCertificate, SplitEvent, NotFound))
        if not isinstance(r, OrbitCertificate):
            continue
        found += 1
        assert r.period % 2 == 0 and r.parity == "even"
        assert r.closure_residual < 1e-9 * r.length
        assert r.q + 1 <= r.pigeonhole_bound
        orbit = certificate_to_billiard_orbit(fam, r)
        assert len(orbit.itinerary) == r.period
        tr = trace_orbit(fam.base, orbit.start, orbit.direction, orbit.period)
        assert isinstance(tr, Trace)
    assert found > 5


def test_period_two_certificate_is_normal_incidence():
    fam = RotatedFamily(axis_square())
    # the left side of the axis-aligned square faces the right side squarely
    r = find_periodic_in_beam(fam, make_interval(fam, 0, 1, 0.4, 0.6), 10)
    assert isinstance(r, OrbitCertificate) and r.period == 2
    orbit = certificate_to_billiard_orbit(fam, r)
    for side in orbit.itinerary:
        e = fam.base.side_direction(side)
        assert abs(e[0] * orbit.direction[0] + e[1] * orbit.direction[1]) < 1e-12


def test_t_bound_default():
    fam = RotatedFamily(Rhombus.from_angle(1.3))
    assert t_bound(fam, 0.1) == pytest.approx(4 * lambda_level(fam, 0) / 0.1 ** 3.1)
    assert t_bound(fam, 0.1, C=1.0, eps=0.0) == pytest.approx(1000.0)


def test_pair_validation():
    with pytest.raises(ValueError):
        RotatedFamily(Rhombus.square(), 2)
