"""Planar geometry kernel: determinant sums, the segment-crossing oracle and
the crossing penalty weights used to bias capacity searches.

Points are plain ``(x, y)`` tuples, segments are ``(a, b)`` pairs of points.
All functions are pure; coordinates are in strip widths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

Point2 = tuple[float, float]
Segment2 = tuple[Point2, Point2]

#: Segments whose endpoints differ by less than this in x have no usable
#: left/right endpoint (double-precision noise floor).
VERTICAL_TOL = 1e-12


def det2(u: Sequence[float], v: Sequence[float]) -> float:
    """2x2 determinant u.x*v.y - u.y*v.x."""
    return u[0] * v[1] - u[1] * v[0]


def cyclic_sum(points: Sequence[Sequence[float]]) -> float:
    """Cyclic sum of det2 over consecutive pairs; twice the signed area.

    Requires at least 3 points.
    """
    n = len(points)
    if n < 3:
        raise ValueError(f"cyclic_sum needs at least 3 points, got {n}")
    total = 0.0
    for i in range(n):
        total += det2(points[i], points[(i + 1) % n])
    return total


def project_xy(p: Sequence[float]) -> Point2:
    """Drop the third coordinate of a point in 3-space."""
    return (p[0], p[1])


def _check_segment(seg: Segment2, name: str) -> None:
    (ax, ay), (bx, by) = seg
    if ax == bx and ay == by:
        raise ValueError(f"{name} is a zero-length segment")


def right_endpoint(seg: Segment2) -> Point2:
    """Endpoint of the segment with strictly larger x."""
    a, b = seg
    if abs(a[0] - b[0]) <= VERTICAL_TOL:
        raise ValueError("vertical segment has no left/right endpoint")
    return a if a[0] > b[0] else b


def left_endpoint(seg: Segment2) -> Point2:
    """Endpoint of the segment with strictly smaller x."""
    a, b = seg
    if abs(a[0] - b[0]) <= VERTICAL_TOL:
        raise ValueError("vertical segment has no left/right endpoint")
    return a if a[0] < b[0] else b


@dataclass(frozen=True)
class CrossingResult:
    crosses: bool
    s: float
    t: float
    degenerate: bool


def _ratios(s1: Segment2, s2: Segment2) -> tuple[float, float, float, float, float]:
    """Intersection parameters of two segments as ratios (D, s, 1-s, t, 1-t).

    V1, V2 are the endpoints of s1 and V3, V4 those of s2.  Solving
    (1-s) V1 + s V2 = (1-t) V3 + t V4 by Cramer's rule yields the four
    ratios as cyclic determinant sums over a common denominator D.
    D == 0 means parallel or collinear directions; ratios are then 0.
    """
    v1, v2 = s1
    v3, v4 = s2
    d = cyclic_sum((v1, v4, v2, v3))
    if d == 0.0:
        return 0.0, 0.0, 0.0, 0.0, 0.0
    s = cyclic_sum((v1, v4, v3)) / d
    one_s = cyclic_sum((v2, v3, v4)) / d
    t = cyclic_sum((v1, v2, v3)) / d
    one_t = cyclic_sum((v2, v1, v4)) / d
    return d, s, one_s, t, one_t


def crossing_oracle(s1: Segment2, s2: Segment2) -> CrossingResult:
    """Solve the 2x2 intersection system for (s, t).

    crosses is true iff the system is nonsingular and both parameters are
    strictly interior, 0 < s < 1 and 0 < t < 1.  degenerate is true iff the
    direction determinant vanishes (parallel/collinear).
    """
    _check_segment(s1, "s1")
    _check_segment(s2, "s2")
    d, s, _, t, _ = _ratios(s1, s2)
    if d == 0.0:
        return CrossingResult(False, 0.0, 0.0, True)
    crosses = 0.0 < s < 1.0 and 0.0 < t < 1.0
    return CrossingResult(crosses, s, t, False)


def chi(s1: Segment2, s2: Segment2) -> float:
    """Crossing penalty in [0, 1]; positive iff the segments cross at points
    interior to both.

    Equals 2 * max(0, min(s, 1-s, t, 1-t)).  Each triple determinant is
    divided by the common denominator before taking the min, so the value is
    orientation independent.  Parallel or collinear segments score 0.
    """
    _check_segment(s1, "s1")
    _check_segment(s2, "s2")
    d, s, one_s, t, one_t = _ratios(s1, s2)
    if d == 0.0:
        return 0.0
    return 2.0 * max(0.0, min(s, one_s, t, one_t))


#: chi_variant(alpha) keeps the three ratios whose triples involve vertex
#: alpha; index 1 drops 1-s, 2 drops s, 3 drops 1-t, 4 drops t.
_DROPPED = {1: "one_s", 2: "s", 3: "one_t", 4: "t"}


def chi_variant(alpha: int, s1: Segment2, s2: Segment2) -> float:
    """Penalty variant that stays positive in one designated non-crossing case.

    Same as chi but the min is taken over the three ratios involving vertex
    ``alpha``; positive on every crossing pair and on the single non-crossing
    configuration whose only negative ratio is the dropped one.
    """
    if alpha not in (1, 2, 3, 4):
        raise ValueError(f"alpha must be in 1..4, got {alpha}")
    _check_segment(s1, "s1")
    _check_segment(s2, "s2")
    d, s, one_s, t, one_t = _ratios(s1, s2)
    if d == 0.0:
        return 0.0
    kept = {"s": s, "one_s": one_s, "t": t, "one_t": one_t}
    del kept[_DROPPED[alpha]]
    return 2.0 * max(0.0, min(kept.values()))


def segment_pitch(seg: Segment2) -> float:
    """Angle of the directed segment with the x-axis, in (-pi/2, 3pi/2]."""
    (ax, ay), (bx, by) = seg
    ang = math.atan2(by - ay, bx - ax)
    if ang <= -math.pi / 2:
        ang += 2.0 * math.pi
    return ang
