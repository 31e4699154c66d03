"""The flat-folded equilateral limit and the reference ladders built from it.

The width-1 strip of aspect ratio sqrt(3) folds flat onto the equilateral
triangle with vertices A=(-1,0), (0,-1/sqrt3), (0,1/sqrt3).  Its boundary
wraps the triangle perimeter exactly once, so any ladder sampled from the
folding that includes the two T-pattern segments has capacity exactly
2*sqrt(3) (cyclic) or sqrt(3) with the wrap quadrilateral dropped.  Families
with containment constraints take the vertical triangle side itself as the
constrained segment; the constraint then holds with the tip interior to it
and the capacity is unchanged.

Bends are indexed by pitch.  The folding consists of four fans; the moving
endpoint of each fan walks one stretch of the triangle perimeter:

    pitch 0..pi/6:      fan around A, far endpoint climbs the base
    pi/6..pi/2:         fan around (0,1/sqrt3), near endpoint walks A->B
    pi/2..5pi/6:        fan around (0,-1/sqrt3), far endpoint walks C->A
    5pi/6..pi:          fan around A again, near endpoint climbs to the axis
"""

from __future__ import annotations

import math

from .ladder import Ladder, SignedSegment3

SQRT3 = math.sqrt(3.0)
UNIT = math.pi / 12.0  # pitch unit used in family notation

#: Triangle of the limit folding (z = 0 throughout).
APEX = (-1.0, 0.0, 0.0)
BASE_MID = (0.0, 0.0, 0.0)
BASE_LOW = (0.0, -1.0 / SQRT3, 0.0)
BASE_HIGH = (0.0, 1.0 / SQRT3, 0.0)


def _sign_for(delta: float) -> int:
    if delta > 0:
        return 1
    if delta < 0:
        return -1
    return 0


def folding_bend(theta: float) -> SignedSegment3:
    """Bend image of the limit folding at pitch theta in [0, pi].

    The first endpoint is the one on the lower boundary edge of the strip, so
    consecutive bends are joined first-to-first / second-to-second and the
    full-circle wrap swaps ends, matching the ladder conventions.
    """
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"folding pitch must be in [0, pi], got {theta}")
    if theta == math.pi / 2:
        return SignedSegment3(BASE_LOW, BASE_HIGH, -1)
    tt = math.tan(theta)
    if theta <= math.pi / 6:
        first, second = APEX, (0.0, tt, 0.0)
        sign = _sign_for(tt)
    elif theta < math.pi / 2:
        p = (SQRT3 * tt - 1.0) / (SQRT3 * tt + 1.0)
        first, second = (-1.0 + p, -p / SQRT3, 0.0), BASE_HIGH
        sign = _sign_for(1.0 - 2.0 * p)
    elif theta <= 5.0 * math.pi / 6.0:
        w = 2.0 / (1.0 - SQRT3 * tt)
        first, second = BASE_LOW, (-w, (1.0 - w) / SQRT3, 0.0)
        sign = _sign_for(2.0 * w - 1.0)
    else:
        first, second = (0.0, tt, 0.0), APEX
        sign = _sign_for(-tt)
    return SignedSegment3(first, second, sign)


#: Vertical triangle side; the segment constrained families duplicate.
SIDE_COPY = SignedSegment3(BASE_LOW, BASE_HIGH, -1)


def folding_sample(pitches_units: list[float], kind: str, special_index: int) -> Ladder:
    """Ladder sampling the folding at the given pitches (in pi/12 units)."""
    segs = tuple(folding_bend(p * UNIT) for p in pitches_units)
    return Ladder(segs, kind, special_index)
