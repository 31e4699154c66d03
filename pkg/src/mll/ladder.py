"""Signed segments in 3-space, induced quadrilaterals and their capacities.

A ladder is an ordered list of signed segments; consecutive segments bound a
quadrilateral whose vertical-strip realization has a closed-form minimal
total side length (the capacity).  Cyclic ladders close up with swapped ends
on the wrap quadrilateral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .geom import chi, chi_variant, project_xy

Point3 = tuple[float, float, float]

#: Lengths within this of 1 are treated as exactly 1 (slope 0); cube-boundary
#: decodes land exactly on 1.
LENGTH_TOL = 1e-9


def slope_of(length: float, sign: int) -> float:
    """Slope forced on a realized segment of the given length across the
    width-1 strip: sign * sqrt(length^2 - 1)."""
    if length < 1.0 - LENGTH_TOL:
        raise ValueError(f"segment length {length} is below 1")
    return sign * math.sqrt(max(length * length - 1.0, 0.0))


def _dist3(a: Point3, b: Point3) -> float:
    return math.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2)


@dataclass(frozen=True)
class SignedSegment3:
    """Directed segment in 3-space tagged with the sign of its forced slope.

    Length must be >= 1 (every bend spans the width-1 strip); sign 0 is the
    length-exactly-1 case.
    """

    first: Point3
    second: Point3
    sign: int

    @property
    def length(self) -> float:
        return _dist3(self.first, self.second)

    @property
    def slope(self) -> float:
        return slope_of(self.length, self.sign)

    def reversed(self) -> "SignedSegment3":
        return SignedSegment3(self.second, self.first, self.sign)

    def planar(self):
        return (project_xy(self.first), project_xy(self.second))


@dataclass(frozen=True)
class Quadrilateral:
    """Signed quadrilateral: bottom/top signed segments plus the 3-space
    distances between corresponding endpoints (the side lengths)."""

    bottom: SignedSegment3
    top: SignedSegment3
    left_len: float
    right_len: float

    @property
    def corners(self) -> tuple[Point3, Point3, Point3, Point3]:
        return (self.bottom.first, self.bottom.second, self.top.first, self.top.second)


def make_quad(bottom: SignedSegment3, top: SignedSegment3) -> Quadrilateral:
    return Quadrilateral(
        bottom,
        top,
        _dist3(bottom.first, top.first),
        _dist3(bottom.second, top.second),
    )


@dataclass(frozen=True)
class Realization:
    """Planar trapezoid with vertical sides on x=0 and x=1 realizing a
    quadrilateral; offset is the y of the top-left vertex."""

    offset: float
    bottom_slope: float
    top_slope: float
    left_len: float
    right_len: float


@dataclass(frozen=True)
class Ladder:
    """Ordered signed segments plus the cyclic/open kind and the 1-based
    index of the vertical segment of the T-pattern."""

    segments: tuple[SignedSegment3, ...]
    kind: str  # "cyclic" | "open"
    special_index: int

    def __post_init__(self):
        if self.kind not in ("cyclic", "open"):
            raise ValueError(f"unknown ladder kind {self.kind!r}")
        n = len(self.segments)
        if not 1 < self.special_index <= n:
            raise ValueError(f"special index {self.special_index} out of range for {n} segments")


@dataclass(frozen=True)
class PenaltySpec:
    """Crossing-penalty attachment: segment pair (1-based), optional variant
    index and weight mu."""

    i: int
    j: int
    alpha: Optional[int] = None
    mu: float = 128.0

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError("penalty needs two distinct segments")
        if self.mu < 0:
            raise ValueError("mu must be positive")
        if self.alpha is not None and self.alpha not in (1, 2, 3, 4):
            raise ValueError(f"alpha must be in 1..4, got {self.alpha}")


def _quad_d(q: Quadrilateral) -> float:
    return q.bottom.slope - q.top.slope


def quad_capacity(q: Quadrilateral) -> float:
    """Minimal |L'| + |R'| over realizations: max(2|L| - d, 2|R| + d) with
    d the bottom-top slope difference."""
    d = _quad_d(q)
    return max(2.0 * q.left_len - d, 2.0 * q.right_len + d)


def minimal_realization(q: Quadrilateral) -> Realization:
    """The realization attaining quad_capacity; offset = max(|L|, |R| + d)."""
    d = _quad_d(q)
    offset = max(q.left_len, q.right_len + d)
    return Realization(
        offset=offset,
        bottom_slope=q.bottom.slope,
        top_slope=q.top.slope,
        left_len=offset,
        right_len=offset - d,
    )


def quad_capacity0(q: Quadrilateral) -> float:
    """Capacity with the signed edges removed: |L| + |R|."""
    return q.left_len + q.right_len


def quad_capacity_u(q: Quadrilateral, u: float) -> float:
    """Interpolation (1-u)*capacity0 + u*capacity for u in [0, 1]."""
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"u must be in [0, 1], got {u}")
    return (1.0 - u) * quad_capacity0(q) + u * quad_capacity(q)


def diag_capacity(q: Quadrilateral) -> float:
    """Minimal |L''| + |R''| over realizations whose planar diagonals are both
    at least as long as both 3-space diagonals of the quadrilateral.

    At offset l the planar diagonals have lengths sqrt(1 + (l + t')^2) and
    sqrt(1 + (l - b')^2); each constraint excludes an open interval of
    offsets, so the minimum is the smallest offset >= the unconstrained
    optimum outside both intervals.
    """
    d = _quad_d(q)
    offset = max(q.left_len, q.right_len + d)
    c1, c2, c3, c4 = q.corners
    need = max(_dist3(c1, c4), _dist3(c2, c3))
    if need > 1.0:
        half = math.sqrt(need * need - 1.0)
        t_s = q.top.slope
        b_s = q.bottom.slope
        # excluded offset intervals (centered where a diagonal degenerates)
        intervals = ((-t_s - half, -t_s + half), (b_s - half, b_s + half))
        moved = True
        while moved:
            moved = False
            for lo, hi in intervals:
                if lo < offset < hi:
                    offset = hi
                    moved = True
    return 2.0 * offset - d


def ladder_quads(ladder: Ladder) -> list[Quadrilateral]:
    """Quadrilaterals induced by consecutive segments; cyclic ladders add the
    wrap quadrilateral whose top is the first segment with swapped ends."""
    segs = ladder.segments
    n = len(segs)
    if ladder.kind == "cyclic" and n < 3:
        raise ValueError("cyclic ladder needs at least 3 segments")
    if ladder.kind == "open" and n < 2:
        raise ValueError("open ladder needs at least 2 segments")
    quads = [make_quad(segs[k], segs[k + 1]) for k in range(n - 1)]
    if ladder.kind == "cyclic":
        quads.append(make_quad(segs[-1], segs[0].reversed()))
    return quads


def ladder_capacity(ladder: Ladder, mask: Optional[Sequence[float]] = None) -> float:
    """Sum of per-quadrilateral masked capacities; mask entry 1 (the default)
    gives the plain capacity, 0 the unsigned |L| + |R| term."""
    quads = ladder_quads(ladder)
    if mask is None:
        return sum(quad_capacity(q) for q in quads)
    if len(mask) != len(quads):
        raise ValueError(f"mask length {len(mask)} != quad count {len(quads)}")
    return sum(quad_capacity_u(q, u) for q, u in zip(quads, mask))


def enhanced_capacity(
    ladder: Ladder, penalty: PenaltySpec, mask: Optional[Sequence[float]] = None
) -> float:
    """Masked capacity plus mu times the crossing penalty of the projected
    segment pair named by the penalty spec."""
    n = len(ladder.segments)
    for idx in (penalty.i, penalty.j):
        if not 1 <= idx <= n:
            raise ValueError(f"penalty segment index {idx} out of range")
    s1 = ladder.segments[penalty.i - 1].planar()
    s2 = ladder.segments[penalty.j - 1].planar()
    if penalty.alpha is None:
        pen = chi(s1, s2)
    else:
        pen = chi_variant(penalty.alpha, s1, s2)
    return ladder_capacity(ladder, mask) + penalty.mu * pen


def ladder_to_record(ladder: Ladder) -> dict:
    """Serialization record: segment endpoint triples, kind, special index."""
    return {
        "segments": [
            {"first": list(s.first), "second": list(s.second), "sign": s.sign}
            for s in ladder.segments
        ],
        "kind": ladder.kind,
        "specialIndex": ladder.special_index,
    }


def ladder_from_record(rec: dict) -> Ladder:
    segs = tuple(
        SignedSegment3(tuple(s["first"]), tuple(s["second"]), int(s["sign"]))
        for s in rec["segments"]
    )
    return Ladder(segs, rec["kind"], int(rec["specialIndex"]))
