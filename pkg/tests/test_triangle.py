import math
import random

import pytest

from billiardlab.geometry import RightTriangle, triangle_to_rhombus
from billiardlab.triangle import fold_diagonal, is_leg, triangle_complexity_bound_check
from billiardlab.unfolding import complexity, propagate_beams


def test_isoceles_n0_holds():
    r = triangle_complexity_bound_check(RightTriangle(math.pi / 4), 0)
    assert r.holds and r.P_rhombus_n == 2 and r.unmatched_folds == 0


def test_seeded_typical_triangle_n10():
    a = random.Random(3).uniform(0.05, math.pi / 2 - 0.05)
    r = triangle_complexity_bound_check(RightTriangle(a), 10)
    assert r.holds and r.unmatched_folds == 0


def test_axis_diagonals_fold_to_legs():
    t = RightTriangle(0.6)
    for g in propagate_beams(triangle_to_rhombus(t), 0, 0).diagonals + \
            propagate_beams(triangle_to_rhombus(t), 1, 0).diagonals:
        assert is_leg(t, fold_diagonal(t, g))


def test_center_passing_diagonal_in_square():
    t = RightTriangle(math.pi / 4)
    rh = triangle_to_rhombus(t)
    seen = 0
    for v in range(4):
        for g in propagate_beams(rh, v, 4).diagonals:
            f = fold_diagonal(t, g)
            # folded directions stay inside the triangle's vertex angle
            assert -1e-12 <= f.direction <= t.vertex_angle(f.source) + 1e-12
            if f.through_center:
                seen += 1
                # stops at the right angle with at most 3x the reflections
                assert f.target == 0
                assert f.reflections <= 3 * g.reflections
    assert seen > 0


def test_every_fold_is_a_triangle_diagonal():
    t = RightTriangle(0.9)
    rh = triangle_to_rhombus(t)
    n = 4
    tri = complexity(t, 3 * n)
    for v in range(4):
        for g in propagate_beams(rh, v, n).diagonals:
            f = fold_diagonal(t, g)
            assert f.reflections <= 3 * n
            if is_leg(t, f):
                continue
            assert any(d.reflections == f.reflections and abs(d.direction - f.direction) < 1e-9
                       for d in tri.per_vertex[f.source])


def test_negative_n_rejected():
    with pytest.raises(ValueError):
        triangle_complexity_bound_check(RightTriangle(0.5), -1)
