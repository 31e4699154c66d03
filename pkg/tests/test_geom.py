import numpy as np
import pytest

from mll.geom import (
    CrossingResult,
    chi,
    chi_variant,
    crossing_oracle,
    cyclic_sum,
    det2,
    left_endpoint,
    project_xy,
    right_endpoint,
)


def test_det2_examples():
    assert det2((1, 0), (0, 1)) == 1
    assert det2((2, 1), (2, 1)) == 0
    assert det2((2, 1), (3, 4)) == 5


def test_det2_bilinear():
    rng = np.random.default_rng(3)
    for _ in range(100):
        u, v = rng.uniform(-3, 3, 2), rng.uniform(-3, 3, 2)
        c = rng.uniform(-5, 5)
        assert det2(c * u, v) == pytest.approx(c * det2(u, v), abs=1e-12)
        assert det2(u, v) == pytest.approx(-det2(v, u), abs=1e-15)


def shoelace_twice(points):
    # independent oracle: trapezoid form of the shoelace formula
    total = 0.0
    n = len(points)
    for i in range(n):
        x1, y1 = points[i]
        x2, y2 = points[(i + 1) % n]
        total += (x1 - x2) * (y1 + y2)
    return total


def test_cyclic_sum_unit_square():
    assert cyclic_sum([(0, 0), (1, 0), (1, 1), (0, 1)]) == pytest.approx(2.0)


def test_cyclic_sum_collinear_zero():
    assert cyclic_sum([(0, 0), (1, 1), (2, 2)]) == pytest.approx(0.0)


def test_cyclic_sum_reversal_negates():
    pts = [(0, 0), (2, 1), (1, 3), (-1, 2)]
    assert cyclic_sum(pts) == pytest.approx(-cyclic_sum(pts[::-1]))


def test_cyclic_sum_matches_shoelace():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        k = rng.integers(3, 9)
        pts = [tuple(p) for p in rng.uniform(-2, 2, (k, 2))]
        assert cyclic_sum(pts) == pytest.approx(shoelace_twice(pts), abs=1e-10)


def test_cyclic_sum_needs_three_points():
    with pytest.raises(ValueError):
        cyclic_sum([(0, 0), (1, 1)])


def test_project_xy():
    assert project_xy((1, 2, 3)) == (1, 2)
    assert project_xy((0, 0, -5)) == (0, 0)
    assert project_xy(project_xy((4, 5, 6)) + (0,)) == (4, 5)


def test_endpoints():
    assert right_endpoint(((0, 0), (1, 1))) == (1, 1)
    assert right_endpoint(((3, 0), (-1, 4))) == (3, 0)
    assert left_endpoint(((3, 0), (-1, 4))) == (-1, 4)
    with pytest.raises(ValueError):
        right_endpoint(((0.5, 0), (0.5, 2)))


def test_crossing_oracle_perpendicular():
    res = crossing_oracle(((-1, 0), (1, 0)), ((0, -1), (0, 1)))
    assert res == CrossingResult(True, 0.5, 0.5, False)


def test_crossing_oracle_parallel_degenerate():
    res = crossing_oracle(((0, 0), (1, 0)), ((0, 1), (1, 1)))
    assert res.degenerate and not res.crosses


def test_crossing_oracle_shared_endpoint_not_interior():
    res = crossing_oracle(((0, 0), (1, 0)), ((1, 0), (2, 5)))
    assert not res.crosses and not res.degenerate


def test_zero_length_segment_rejected():
    with pytest.raises(ValueError):
        crossing_oracle(((1, 1), (1, 1)), ((0, 0), (1, 0)))
    with pytest.raises(ValueError):
        chi(((0, 0), (1, 0)), ((2, 2), (2, 2)))


def test_chi_perpendicular_midpoint_is_one():
    assert chi(((-1, 0), (1, 0)), ((0, -1), (0, 1))) == pytest.approx(1.0)


def _random_pairs(n, seed=7):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        pts = rng.uniform(-2, 2, (4, 2))
        yield (tuple(pts[0]), tuple(pts[1])), (tuple(pts[2]), tuple(pts[3]))


def test_chi_positive_iff_crossing():
    for s1, s2 in _random_pairs(10000):
        res = crossing_oracle(s1, s2)
        v = chi(s1, s2)
        assert 0.0 <= v <= 1.0
        assert (v > 0) == res.crosses


def test_chi_symmetries():
    for s1, s2 in _random_pairs(300, seed=8):
        v = chi(s1, s2)
        assert chi((s1[1], s1[0]), s2) == pytest.approx(v, abs=1e-12)
        assert chi(s1, (s2[1], s2[0])) == pytest.approx(v, abs=1e-12)
        assert chi(s2, s1) == pytest.approx(v, abs=1e-12)


def test_chi_continuity_spot_check():
    s1 = ((-1.0, 0.1), (1.0, -0.2))
    s2 = ((0.2, -1.0), (-0.1, 1.0))
    base = chi(s1, s2)
    for eps in (1e-6, 1e-8):
        moved = ((s1[0][0] + eps, s1[0][1]), s1[1])
        assert abs(chi(moved, s2) - base) < 100 * eps


def test_chi_variant_alpha_range():
    with pytest.raises(ValueError):
        chi_variant(0, ((0, 0), (1, 0)), ((0, -1), (1, 1)))
    with pytest.raises(ValueError):
        chi_variant(5, ((0, 0), (1, 0)), ((0, -1), (1, 1)))


def test_chi_variant_positive_on_crossings():
    for s1, s2 in _random_pairs(2000, seed=9):
        res = crossing_oracle(s1, s2)
        if not res.crosses:
            continue
        for alpha in (1, 2, 3, 4):
            v = chi_variant(alpha, s1, s2)
            assert 0.0 < v <= 1.0


#: chi_variant(alpha) drops one ratio of (s, 1-s, t, 1-t); a non-crossing
#: pair whose only negative ratio is the dropped one stays positive, any
#: negative retained ratio kills it.
_DROP_POS = {1: 1, 2: 0, 3: 3, 4: 2}


def test_chi_variant_nonconvex_sign_patterns():
    seen = {alpha: {True: 0, False: 0} for alpha in (1, 2, 3, 4)}
    for s1, s2 in _random_pairs(20000, seed=10):
        res = crossing_oracle(s1, s2)
        if res.degenerate or res.crosses:
            continue
        ratios = (res.s, 1.0 - res.s, res.t, 1.0 - res.t)
        negatives = [i for i, q in enumerate(ratios) if q < 0]
        if len(negatives) != 1:
            continue
        for alpha in (1, 2, 3, 4):
            v = chi_variant(alpha, s1, s2)
            if _DROP_POS[alpha] == negatives[0]:
                assert v > 0.0
                seen[alpha][True] += 1
            else:
                assert v == 0.0
                seen[alpha][False] += 1
    for alpha in (1, 2, 3, 4):
        assert seen[alpha][True] > 10
        assert seen[alpha][False] > 10


def test_chi_variant_bounded_everywhere():
    for s1, s2 in _random_pairs(3000, seed=12):
        for alpha in (1, 2, 3, 4):
            v = chi_variant(alpha, s1, s2)
            assert 0.0 <= v <= 1.0
