"""Ladder family specifications, the cube parametrization and the built-in
registry of calculations and controls.

A family is a declarative object: pitch specs in pi/12 units, the special
vertical-segment index, containment constraints, an optional crossing
penalty, a mask pattern and a capacity threshold.  A point of the unit cube
[0,1]^K plus a sign vector in {-1,+1}^L decodes deterministically to a
ladder; the variable layout is normative:

    r[0..3]                b, t, x, y of the T-pattern
    interval pitch vars    ascending free-segment index
    length vars            ascending free-segment index
    center vars            ascending free-segment index
                           (cx, cy for unconstrained, one parameter for
                           containment-constrained segments)
    height vars            ascending free-segment index, (z_first, z_second)

Containment-constrained segments are decoded after their source segments and
satisfy their constraint exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Literal, Optional, Sequence

import numpy as np

from .geom import left_endpoint, right_endpoint, segment_pitch
from .ladder import LENGTH_TOL, Ladder, PenaltySpec, SignedSegment3
from .reference import SQRT3, UNIT, folding_sample

FORMAT_VERSION = "mll-family/1"

#: Largest bottom slope of the T-pattern: (sqrt27 - sqrt11)/4.
BETA = (math.sqrt(27.0) - math.sqrt(11.0)) / 4.0

#: Default confining region for the (b, t) slope pair.  Configurable per
#: family; chosen to contain the equilateral limit point (0, 1/sqrt3).
DEFAULT_BT_REGION = ((0.0, 0.4), (BETA, 0.4), (BETA, 0.8), (0.0, 0.8))

WIDEN = math.pi / 30.0  # 2/5 of a pitch unit

X_MAX = 1.0 / 18.0
Y_MAX = 1.0 / 30.0


class FamilyError(ValueError):
    """Bad family definition."""


class DecodeError(ValueError):
    """Cube point cannot be decoded (empty bt-region slice)."""


def lerp(a: float, b: float, r: float) -> float:
    """(1-r)a + rb."""
    return (1.0 - r) * a + r * b


def coerce(r: Sequence[float], r0: Sequence[float], u: float) -> list[float]:
    """Pull r toward r0 componentwise: (r + u*r0) / (1 + u); identity at u=0."""
    if u < 0:
        raise ValueError("coercion factor must be >= 0")
    if len(r) != len(r0):
        raise ValueError("coerce needs vectors of equal length")
    opu = 1.0 + u
    return [(ri + u * r0i) / opu for ri, r0i in zip(r, r0)]


def clamp_unit(r: Sequence[float]) -> list[float]:
    """Componentwise nearest point of [0, 1]."""
    return [0.0 if x < 0.0 else (1.0 if x > 1.0 else x) for x in r]


@dataclass(frozen=True)
class PitchSpec:
    """Pitch range in pi/12 units; widen flags extend an endpoint by 2/5 of a
    unit (pi/30)."""

    lo: float
    hi: float
    widen_lo: bool = False
    widen_hi: bool = False

    def __post_init__(self):
        if self.lo > self.hi:
            raise FamilyError(f"pitch interval [{self.lo}, {self.hi}] is empty")
        if not (-math.pi / 2 < self.eff_lo and self.eff_hi < 3 * math.pi / 2):
            raise FamilyError("effective pitch range leaves (-pi/2, 3pi/2)")

    @property
    def fixed(self) -> bool:
        return self.lo == self.hi and not (self.widen_lo or self.widen_hi)

    @property
    def eff_lo(self) -> float:
        return self.lo * UNIT - (WIDEN if self.widen_lo else 0.0)

    @property
    def eff_hi(self) -> float:
        return self.hi * UNIT + (WIDEN if self.widen_hi else 0.0)


def fixed_pitch(v: float) -> PitchSpec:
    return PitchSpec(v, v)


@dataclass(frozen=True)
class ContainmentConstraint:
    """The container segment's planar projection must contain the named
    endpoint of the source segment's projection."""

    source: int
    container: int
    endpoint: Literal["right", "left"]

    def __post_init__(self):
        if self.source == self.container:
            raise FamilyError("containment needs two distinct segments")
        if self.endpoint not in ("right", "left"):
            raise FamilyError(f"bad endpoint {self.endpoint!r}")


@dataclass(frozen=True)
class CubePoint:
    r: tuple[float, ...]
    signs: tuple[int, ...]


@dataclass(frozen=True)
class TPatternParams:
    """Slopes and offset of the two T-pattern segments: b and t are the
    forced slopes of the first and the special segment, (x, y) points from
    the origin to the special segment's midpoint."""

    b: float
    t: float
    x: float
    y: float


def t_pattern_of(ladder: Ladder, special_index: int) -> TPatternParams:
    b1 = ladder.segments[0]
    bj = ladder.segments[special_index - 1]
    return TPatternParams(
        b=math.sqrt(max(b1.length ** 2 - 1.0, 0.0)),
        t=math.sqrt(max(bj.length ** 2 - 1.0, 0.0)),
        x=0.5 * (bj.first[0] + bj.second[0]),
        y=0.5 * (bj.first[1] + bj.second[1]),
    )


MaskEntry = object  # 0.0 | 1.0 | "a"


@dataclass(frozen=True)
class FamilySpec:
    name: str
    kind: Literal["A", "B"]  # A cyclic, B open
    pitches: tuple[PitchSpec, ...]
    special_index: int
    constraints: tuple[ContainmentConstraint, ...] = ()
    penalty: Optional[PenaltySpec] = None
    mask: Optional[tuple[MaskEntry, ...]] = None
    mask_a: float = 0.36
    threshold: float = 2.0 * SQRT3
    bt_region: tuple[tuple[float, float], ...] = DEFAULT_BT_REGION
    max_free_length: float = 2.0
    center_mode: Literal["box", "absolute"] = "box"
    heights_frozen: bool = True
    reference: Optional[CubePoint] = None
    ref_centers: tuple[tuple[int, tuple[float, float]], ...] = ()
    default_coercion: float = 0.0

    def __post_init__(self):
        n = len(self.pitches)
        j = self.special_index
        if not 1 < j <= n:
            raise FamilyError(f"special index {j} out of range for {n} segments")
        if not self.pitches[0].fixed or self.pitches[0].lo != 0:
            raise FamilyError("first pitch must be fixed at 0")
        pj = self.pitches[j - 1]
        if not pj.fixed or pj.lo != 6:
            raise FamilyError("special pitch must be fixed at 6 (pi/2)")
        free = self.free_indices
        for c in self.constraints:
            for idx in (c.source, c.container):
                if not 1 <= idx <= n or idx in (1, j):
                    raise FamilyError(f"constraint index {idx} must name a free segment")
            if c.container == c.source:
                raise FamilyError("constraint source equals container")
            src = self.pitches[c.source - 1]
            if not src.fixed:
                raise FamilyError("containment source needs a fixed pitch")
            if abs(math.cos(src.eff_lo)) <= 1e-9:
                raise FamilyError("containment source pitch must not be vertical")
        containers = [c.container for c in self.constraints]
        if len(set(containers)) != len(containers):
            raise FamilyError("segment constrained twice")
        if set(containers) & {c.source for c in self.constraints}:
            raise FamilyError("cyclic constraint dependency")
        if self.penalty is not None:
            for idx in (self.penalty.i, self.penalty.j):
                if not 1 <= idx <= n:
                    raise FamilyError(f"penalty index {idx} out of range")
        if self.mask is not None and len(self.mask) != self.quad_count:
            raise FamilyError(
                f"mask length {len(self.mask)} != quad count {self.quad_count}"
            )
        if len(self.bt_region) < 3:
            raise FamilyError("bt region needs at least 3 vertices")
        if self.max_free_length <= 1.0:
            raise FamilyError("max free length must exceed 1")
        _ = free

    @property
    def n_segments(self) -> int:
        return len(self.pitches)

    @property
    def quad_count(self) -> int:
        return self.n_segments if self.kind == "A" else self.n_segments - 1

    @property
    def free_indices(self) -> tuple[int, ...]:
        j = self.special_index
        return tuple(k for k in range(1, self.n_segments + 1) if k not in (1, j))

    def constraint_for(self, seg_index: int) -> Optional[ContainmentConstraint]:
        for c in self.constraints:
            if c.container == seg_index:
                return c
        return None

    def mask_values(self, a: Optional[float] = None) -> list[float]:
        """Concrete per-quad mask weights; entries 'a' take the scalar a."""
        if a is None:
            a = self.mask_a
        if not 0.0 <= a <= 1.0:
            raise ValueError(f"mask scalar a must be in [0, 1], got {a}")
        if self.mask is None:
            return [1.0] * self.quad_count
        return [a if e == "a" else float(e) for e in self.mask]


# ---------------------------------------------------------------------------
# Variable layout
# ---------------------------------------------------------------------------

CENTER_BOX = 0
CENTER_ABS = 1
CENTER_CONTAIN_RIGHT = 2
CENTER_CONTAIN_LEFT = 3


@dataclass
class Layout:
    """Flat decode program consumed by the evaluation kernels (all segment
    arrays are 0-based and length N)."""

    family: FamilySpec
    n: int
    j: int  # 0-based special index
    cyclic: bool
    K: int
    L: int
    quads: int
    pitch_lo: np.ndarray
    pitch_hi: np.ndarray
    pitch_var: np.ndarray
    len_var: np.ndarray
    center_kind: np.ndarray
    center_var1: np.ndarray
    center_var2: np.ndarray
    source_seg: np.ndarray
    ref_cx: np.ndarray
    ref_cy: np.ndarray
    h_var1: np.ndarray
    h_var2: np.ndarray
    sign_slot: np.ndarray
    decode_order: np.ndarray
    poly_x: np.ndarray
    poly_y: np.ndarray
    mask_codes: tuple[MaskEntry, ...]
    pen_i: int
    pen_j: int
    pen_alpha: int
    pen_mu: float
    heights_frozen: bool
    lmax: float
    r0: Optional[np.ndarray]

    def mask_values(self, a: Optional[float] = None) -> np.ndarray:
        fam = self.family
        if a is None:
            a = fam.mask_a
        vals = [a if e == "a" else float(e) for e in self.mask_codes]
        return np.asarray(vals, dtype=np.float64)


def build_layout(
    family: FamilySpec, heights_frozen: Optional[bool] = None
) -> Layout:
    n = family.n_segments
    j0 = family.special_index - 1
    ints = lambda: np.full(n, -1, dtype=np.int32)
    floats = lambda: np.zeros(n, dtype=np.float64)
    pitch_lo, pitch_hi = floats(), floats()
    pitch_var, len_var = ints(), ints()
    center_kind, center_var1, center_var2 = ints(), ints(), ints()
    source_seg, h_var1, h_var2, sign_slot = ints(), ints(), ints(), ints()
    ref_cx, ref_cy = floats(), floats()

    ref_center_map = dict(family.ref_centers)
    free = [k - 1 for k in family.free_indices]
    nv = 4  # b, t, x, y
    for k in free:
        spec = family.pitches[k]
        pitch_lo[k] = spec.eff_lo
        pitch_hi[k] = spec.eff_hi
        if not spec.fixed:
            pitch_var[k] = nv
            nv += 1
    for k in free:
        len_var[k] = nv
        nv += 1
    for k in free:
        cons = family.constraint_for(k + 1)
        if cons is None:
            center_kind[k] = CENTER_BOX if family.center_mode == "box" else CENTER_ABS
            center_var1[k] = nv
            center_var2[k] = nv + 1
            nv += 2
            if family.center_mode == "box":
                if k + 1 not in ref_center_map:
                    raise FamilyError(
                        f"{family.name}: box center mode needs a reference center "
                        f"for segment {k + 1}"
                    )
                ref_cx[k], ref_cy[k] = ref_center_map[k + 1]
        else:
            center_kind[k] = (
                CENTER_CONTAIN_RIGHT if cons.endpoint == "right" else CENTER_CONTAIN_LEFT
            )
            center_var1[k] = nv
            nv += 1
            source_seg[k] = cons.source - 1
    slot = 0
    for k in free:
        h_var1[k] = nv
        h_var2[k] = nv + 1
        nv += 2
        sign_slot[k] = slot
        slot += 1
    order = [k for k in free if family.constraint_for(k + 1) is None] + [
        k for k in free if family.constraint_for(k + 1) is not None
    ]

    frozen = family.heights_frozen if heights_frozen is None else heights_frozen
    pen = family.penalty
    r0 = None
    if family.reference is not None:
        r0 = np.asarray(family.reference.r, dtype=np.float64)
        if r0.shape != (nv,):
            raise FamilyError(f"{family.name}: reference point has wrong dimension")
    return Layout(
        family=family,
        n=n,
        j=j0,
        cyclic=family.kind == "A",
        K=nv,
        L=len(free),
        quads=family.quad_count,
        pitch_lo=pitch_lo,
        pitch_hi=pitch_hi,
        pitch_var=pitch_var,
        len_var=len_var,
        center_kind=center_kind,
        center_var1=center_var1,
        center_var2=center_var2,
        source_seg=source_seg,
        ref_cx=ref_cx,
        ref_cy=ref_cy,
        h_var1=h_var1,
        h_var2=h_var2,
        sign_slot=sign_slot,
        decode_order=np.asarray(order, dtype=np.int32),
        poly_x=np.asarray([p[0] for p in family.bt_region], dtype=np.float64),
        poly_y=np.asarray([p[1] for p in family.bt_region], dtype=np.float64),
        mask_codes=tuple(family.mask) if family.mask is not None else (1.0,) * family.quad_count,
        pen_i=(pen.i - 1) if pen is not None else -1,
        pen_j=(pen.j - 1) if pen is not None else -1,
        pen_alpha=(pen.alpha or 0) if pen is not None else 0,
        pen_mu=pen.mu if pen is not None else 0.0,
        heights_frozen=frozen,
        lmax=family.max_free_length,
        r0=r0,
    )


def dimension(family: FamilySpec) -> tuple[int, int]:
    """Cube dimension K and sign-vector length L of the family."""
    lay = build_layout(family)
    return lay.K, lay.L


# ---------------------------------------------------------------------------
# Decode
# ---------------------------------------------------------------------------


def decode(family: FamilySpec, point: CubePoint, heights_frozen: Optional[bool] = None) -> Ladder:
    """Decode a cube point to a ladder (deterministic; satisfies every
    containment constraint exactly).

    Signs are taken from the point's sign vector and clamped to 0 on
    segments of length exactly 1.
    """
    from . import kernel

    lay = build_layout(family, heights_frozen=heights_frozen)
    if len(point.r) != lay.K:
        raise DecodeError(f"point has {len(point.r)} coordinates, family needs {lay.K}")
    if len(point.signs) != lay.L:
        raise DecodeError(f"point has {len(point.signs)} signs, family needs {lay.L}")
    for s in point.signs:
        if s not in (-1, 1):
            raise DecodeError(f"signs must be -1 or +1, got {s}")
    for x in point.r:
        if not 0.0 <= x <= 1.0:
            raise DecodeError(f"cube coordinate {x} outside [0, 1]")
    eng = kernel.make_engine(lay, backend="pure")
    segs = eng.decode_segments(
        np.asarray(point.r, dtype=np.float64),
        np.asarray(point.signs, dtype=np.int8),
    )
    if segs is None:
        raise DecodeError("bt region slice at b is empty")
    out = []
    for k, (fx, fy, fz, sx, sy, sz) in enumerate(segs):
        length = math.sqrt((sx - fx) ** 2 + (sy - fy) ** 2 + (sz - fz) ** 2)
        if k == 0:
            sign = 0 if abs(length - 1.0) <= LENGTH_TOL else 1
        elif k == lay.j:
            sign = -1
        else:
            sign = int(point.signs[lay.sign_slot[k]])
            if abs(length - 1.0) <= LENGTH_TOL:
                sign = 0
        out.append(SignedSegment3((fx, fy, fz), (sx, sy, sz), sign))
    return Ladder(tuple(out), "cyclic" if lay.cyclic else "open", family.special_index)


def objective(
    family: FamilySpec,
    mask_a: Optional[float] = None,
    heights_frozen: Optional[bool] = None,
    backend: Optional[str] = None,
):
    """Evaluator CubePoint -> scalar: masked capacity plus the family's
    penalty term; decode failures evaluate to +inf."""
    from . import kernel

    lay = build_layout(family, heights_frozen=heights_frozen)
    eng = kernel.make_engine(lay, backend=backend)
    mask = lay.mask_values(mask_a)

    def evaluate(point: CubePoint) -> float:
        r = np.asarray(point.r, dtype=np.float64)
        signs = np.asarray(point.signs, dtype=np.int8)
        return eng.eval_point(r, signs, mask)

    return evaluate


# ---------------------------------------------------------------------------
# Validation diagnostics
# ---------------------------------------------------------------------------


@dataclass
class Diagnostics:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, what: str, residual: float = 0.0):
        self.violations.append((what, residual))


def _point_in_polygon(px: float, py: float, poly, tol: float = 1e-9) -> bool:
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        if (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1) < -tol * max(
            1.0, abs(x2 - x1) + abs(y2 - y1)
        ):
            return False
    return True


def validate(family: FamilySpec, ladder: Ladder, tol: float = 1e-9) -> Diagnostics:
    """Report every violated pitch range, sign rule, height bound, T-pattern
    bound and containment constraint of the ladder against the family."""
    diag = Diagnostics()
    n = family.n_segments
    if len(ladder.segments) != n:
        diag.add(f"segment count {len(ladder.segments)} != {n}")
        return diag
    expected_kind = "cyclic" if family.kind == "A" else "open"
    if ladder.kind != expected_kind:
        diag.add(f"ladder kind {ladder.kind} != {expected_kind}")
    if ladder.special_index != family.special_index:
        diag.add("special index mismatch")

    for k, seg in enumerate(ladder.segments, start=1):
        spec = family.pitches[k - 1]
        planar = seg.planar()
        plen = math.hypot(planar[1][0] - planar[0][0], planar[1][1] - planar[0][1])
        if plen > 1e-12:
            pitch = segment_pitch(planar)
            lo, hi = spec.eff_lo, spec.eff_hi
            if not (lo - tol <= pitch <= hi + tol):
                diag.add(f"segment {k} pitch {pitch:.6f} outside [{lo:.6f}, {hi:.6f}]",
                         max(lo - pitch, pitch - hi))
        length = seg.length
        if length < 1.0 - LENGTH_TOL:
            diag.add(f"segment {k} length {length} below 1", 1.0 - length)
        if seg.sign == 0:
            if abs(length - 1.0) > LENGTH_TOL:
                diag.add(f"segment {k} has sign 0 but length {length}", abs(length - 1.0))
        elif length < 1.0 - LENGTH_TOL:
            diag.add(f"segment {k} has sign {seg.sign} but length {length}")
        for p in (seg.first, seg.second):
            if abs(p[2]) > 0.5 + tol:
                diag.add(f"segment {k} height {p[2]} outside [-1/2, 1/2]", abs(p[2]) - 0.5)

    b1 = ladder.segments[0]
    if b1.sign not in (0, 1):
        diag.add(f"first segment sign {b1.sign} not in {{0, +1}}")
    if abs(b1.second[0]) > tol or abs(b1.second[1]) > tol or abs(b1.second[2]) > tol:
        diag.add("first segment does not end at the origin")
    bj = ladder.segments[family.special_index - 1]
    if bj.sign != -1:
        diag.add(f"special segment sign {bj.sign} != -1")
    tp = t_pattern_of(ladder, family.special_index)
    if not (-tol <= tp.x <= X_MAX + tol):
        diag.add(f"T-pattern x {tp.x} outside [0, 1/18]", abs(tp.x - X_MAX / 2))
    if abs(tp.y) > Y_MAX + tol:
        diag.add(f"T-pattern y {tp.y} outside [-1/30, 1/30]", abs(tp.y) - Y_MAX)
    if not _point_in_polygon(tp.b, tp.t, family.bt_region, tol):
        diag.add(f"(b, t) = ({tp.b:.6f}, {tp.t:.6f}) outside the bt region")

    for c in family.constraints:
        src = ladder.segments[c.source - 1].planar()
        con = ladder.segments[c.container - 1].planar()
        try:
            tip = right_endpoint(src) if c.endpoint == "right" else left_endpoint(src)
        except ValueError:
            diag.add(f"constraint {c.source}->{c.container}: source is vertical")
            continue
        vx, vy = con[1][0] - con[0][0], con[1][1] - con[0][1]
        wx, wy = tip[0] - con[0][0], tip[1] - con[0][1]
        den = vx * vx + vy * vy
        if den == 0.0:
            diag.add(f"constraint {c.source}->{c.container}: container degenerate")
            continue
        cross = abs(vx * wy - vy * wx) / math.sqrt(den)
        param = (wx * vx + wy * vy) / den
        if cross > tol:
            diag.add(
                f"constraint {c.source}->{c.container}: tip off the container line",
                cross,
            )
        if not -tol <= param <= 1.0 + tol:
            diag.add(
                f"constraint {c.source}->{c.container}: tip parameter {param} outside [0, 1]",
                max(-param, param - 1.0),
            )
    return diag


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------


def _pitch(units) -> PitchSpec:
    """Shorthand: scalar -> fixed; (lo, hi, widen_lo, widen_hi) -> interval."""
    if isinstance(units, (int, float)):
        return fixed_pitch(float(units))
    lo, hi, wlo, whi = units
    return PitchSpec(float(lo), float(hi), wlo, whi)


# name, kind, pitches, special index, constraints, penalty, mask,
# reference sample pitches (pi/12 units)
_REGISTRY_TABLE = [
    ("cross1", "A", (0, (0, 1, True, False), 4, 6), 4, (), (2, 3, None), None,
     (0, 1, 4, 6)),
    ("cross2", "A", (0, (0, 1, True, False), 6, 8), 3, (), (2, 4, None), None,
     (0, 1, 6, 8)),
    # Variant penalty indices are pinned to the geometric escape case each
    # calculation must keep penalized (source tip sliding past the container
    # line), not copied numerically: under the vertex order used by
    # chi_variant here, the right-tip cases take alpha=1 and the left-tip
    # case alpha=2.
    ("cross3", "A", (0, 1, (4, 6, False, True), 6), 4, (), (2, 3, 1), None,
     (0, 1, 4, 6)),
    ("cross4", "A", (0, 1, 6, (6, 8, True, False)), 3, (), (2, 4, 1), None,
     (0, 1, 6, 8)),
    ("cross5", "A", (0, 4, 6, (8, 12, True, False)), 3, (), (2, 4, 2), None,
     (0, 4, 6, 8)),
    ("geo1", "A", (0, 4, 6, (8, 12, False, True)), 3, ((2, 4, "left"),), None,
     ("a", "a", 0, 0), (0, 4, 6, 10)),
    ("geo2", "B", (0, 1, (4, 6, False, True), 6), 4, ((2, 3, "right"),), None,
     ("a", "a", 0), (0, 1, 6, 6)),
    ("geo3", "A", (0, 1, (4, 6, False, True), 6, (6, 8, True, False), 11), 4,
     ((2, 5, "right"), (6, 3, "right")), None, (0, "a", 0, 0, "a", 0),
     (0, 1, 6, 6, 6, 11)),
    ("geo4", "A", (0, 1, (4, 6, False, True), (6, 8, True, False), 6, 11), 5,
     ((2, 3, "right"), (6, 4, "right")), None, ("a", "a", 0, 0, "a", 0),
     (0, 1, 6, 6, 6, 11)),
    ("geo5", "A", (0, 1, (4, 6, False, True), (6, 8, True, False), 6, 11), 5,
     ((2, 4, "right"), (6, 3, "right")), None, ("a", "a", 0, 0, "a", 0),
     (0, 1, 6, 6, 6, 11)),
    ("geo31", "A", (0, 1, (4, 6, False, True), 6, (6, 8, True, False), 11), 4,
     ((2, 3, "right"), (6, 5, "right")), None, None, (0, 1, 6, 6, 6, 11)),
    ("cross1X", "A", (0, (0, 1, True, True), 4, 6), 4, (), (2, 3, None), None,
     (0, 1, 4, 6)),
    ("geo33", "A", (0, 1, (4, 6, False, True), 6), 4, ((2, 3, "right"),), None,
     None, (0, 1, 6, 6)),
    ("geo3X", "A", (0, 1, (4, 6, False, True), 6, 11), 4, ((5, 3, "right"),),
     None, None, (0, 1, 6, 6, 11)),
    ("demo", "B", (0, 2, 6), 3, (), None, None, (0, 2, 6)),
]


def _reference_point(family: FamilySpec, ref_pitches) -> tuple[CubePoint, tuple]:
    """Invert the decode on the family's flat-folding sample: returns the
    cube point hitting the reference ladder and the box-center anchors."""
    ref = folding_sample(
        list(ref_pitches), "cyclic" if family.kind == "A" else "open", family.special_index
    )
    lay = build_layout(family)
    r = [0.0] * lay.K
    # T-pattern: b = 0, t = 1/sqrt3, x = 0, y = 0.
    tlo, thi = _t_interval_py(lay, 0.0)
    r[0] = 0.0
    r[1] = (1.0 / SQRT3 - tlo) / (thi - tlo)
    r[2] = 0.0
    r[3] = 0.5
    centers = []
    signs = []
    for k in (i - 1 for i in family.free_indices):
        seg = ref.segments[k]
        spec = family.pitches[k]
        theta = ref_pitches[k] * UNIT
        if not spec.fixed:
            r[lay.pitch_var[k]] = (theta - spec.eff_lo) / (spec.eff_hi - spec.eff_lo)
        length = seg.length
        r[lay.len_var[k]] = (length - 1.0) / (lay.lmax - 1.0)
        cons = family.constraint_for(k + 1)
        if cons is None:
            cx = 0.5 * (seg.first[0] + seg.second[0])
            cy = 0.5 * (seg.first[1] + seg.second[1])
            centers.append((k + 1, (cx, cy)))
            r[lay.center_var1[k]] = 0.5
            r[lay.center_var2[k]] = 0.5
        else:
            src = ref.segments[cons.source - 1].planar()
            tip = right_endpoint(src) if cons.endpoint == "right" else left_endpoint(src)
            planar = seg.planar()
            plen = math.hypot(planar[1][0] - planar[0][0], planar[1][1] - planar[0][1])
            param = (
                math.hypot(tip[0] - planar[0][0], tip[1] - planar[0][1]) / plen
            )
            r[lay.center_var1[k]] = param
        r[lay.h_var1[k]] = 0.5
        r[lay.h_var2[k]] = 0.5
        signs.append(seg.sign if seg.sign != 0 else 1)
    # tan() rounding can push inverted coordinates out of the cube by ~1e-16
    r = [0.0 if v < 0.0 else (1.0 if v > 1.0 else v) for v in r]
    return CubePoint(tuple(r), tuple(signs)), tuple(centers)


def _t_interval_py(lay: Layout, b: float):
    ts = []
    px, py = lay.poly_x, lay.poly_y
    n = len(px)
    for i in range(n):
        x1, y1 = px[i], py[i]
        x2, y2 = px[(i + 1) % n], py[(i + 1) % n]
        if x1 == x2:
            if x1 == b:
                ts += [y1, y2]
        elif (x1 - b) * (x2 - b) <= 0.0:
            ts.append(y1 + (b - x1) * (y2 - y1) / (x2 - x1))
    if not ts:
        raise DecodeError(f"bt region slice at b={b} is empty")
    return min(ts), max(ts)


def _build_registry() -> list[FamilySpec]:
    fams = []
    for name, kind, pitches, j, cons, pen, mask, refp in _REGISTRY_TABLE:
        threshold = 2.0 * SQRT3 if kind == "A" else SQRT3
        if name == "demo":
            # claim level for the demo family is sqrt3 - 1/50
            threshold = SQRT3 - 0.02
        fam = FamilySpec(
            name=name,
            kind=kind,
            pitches=tuple(_pitch(p) for p in pitches),
            special_index=j,
            constraints=tuple(ContainmentConstraint(*c) for c in cons),
            penalty=PenaltySpec(pen[0], pen[1], alpha=pen[2]) if pen else None,
            mask=mask,
            threshold=threshold,
        )
        # Two passes: centers of the reference ladder anchor the box center
        # mode, and the reference cube point is inverted against them.
        _, centers = _reference_point(replace(fam, center_mode="absolute"), refp)
        fam = replace(fam, ref_centers=centers)
        point, _ = _reference_point(fam, refp)
        fam = replace(fam, reference=point)
        fams.append(fam)
    return fams


_REGISTRY: Optional[list[FamilySpec]] = None


def registry() -> list[FamilySpec]:
    """The built-in families: cross1..cross5, geo1..geo5, geo31, the controls
    cross1X/geo33/geo3X and the demo family."""
    global _REGISTRY
    if _REGISTRY is None:
        _REGISTRY = _build_registry()
    return list(_REGISTRY)


def get_family(name: str) -> FamilySpec:
    for fam in registry():
        if fam.name == name:
            return fam
    raise KeyError(f"unknown family {name!r}")


# ---------------------------------------------------------------------------
# Family definition files
# ---------------------------------------------------------------------------


def family_to_json(family: FamilySpec) -> dict:
    return {
        "format": FORMAT_VERSION,
        "layout": "tpattern(b,t,x,y); interval pitches asc; lengths asc; "
                  "centers asc (cx,cy free / 1 contained); heights asc pairs",
        "name": family.name,
        "kind": family.kind,
        "pitches": [
            {"lo": p.lo, "hi": p.hi, "widenLo": p.widen_lo, "widenHi": p.widen_hi}
            for p in family.pitches
        ],
        "specialIndex": family.special_index,
        "constraints": [
            {"source": c.source, "container": c.container, "endpoint": c.endpoint}
            for c in family.constraints
        ],
        "penalty": None
        if family.penalty is None
        else {
            "i": family.penalty.i,
            "j": family.penalty.j,
            "alpha": family.penalty.alpha,
            "mu": family.penalty.mu,
        },
        "mask": list(family.mask) if family.mask is not None else None,
        "maskA": family.mask_a,
        "threshold": family.threshold,
        "btRegion": [list(p) for p in family.bt_region],
        "maxFreeLength": family.max_free_length,
        "centerMode": family.center_mode,
        "heightsFrozen": family.heights_frozen,
        "reference": None
        if family.reference is None
        else {"r": list(family.reference.r), "signs": list(family.reference.signs)},
        "refCenters": [[k, list(c)] for k, c in family.ref_centers],
        "defaultCoercion": family.default_coercion,
    }


def family_from_json(data: dict) -> FamilySpec:
    if data.get("format") != FORMAT_VERSION:
        raise FamilyError(f"unsupported family format {data.get('format')!r}")
    ref = data.get("reference")
    return FamilySpec(
        name=data["name"],
        kind=data["kind"],
        pitches=tuple(
            PitchSpec(p["lo"], p["hi"], p["widenLo"], p["widenHi"])
            for p in data["pitches"]
        ),
        special_index=data["specialIndex"],
        constraints=tuple(
            ContainmentConstraint(c["source"], c["container"], c["endpoint"])
            for c in data["constraints"]
        ),
        penalty=None
        if data.get("penalty") is None
        else PenaltySpec(
            data["penalty"]["i"],
            data["penalty"]["j"],
            alpha=data["penalty"]["alpha"],
            mu=data["penalty"]["mu"],
        ),
        mask=tuple(data["mask"]) if data.get("mask") is not None else None,
        mask_a=data.get("maskA", 0.36),
        threshold=data["threshold"],
        bt_region=tuple(tuple(p) for p in data["btRegion"]),
        max_free_length=data.get("maxFreeLength", 2.0),
        center_mode=data.get("centerMode", "box"),
        heights_frozen=data.get("heightsFrozen", True),
        reference=None
        if ref is None
        else CubePoint(tuple(ref["r"]), tuple(ref["signs"])),
        ref_centers=tuple(
            (int(k), (c[0], c[1])) for k, c in data.get("refCenters", [])
        ),
        default_coercion=data.get("defaultCoercion", 0.0),
    )


def load_family(path: str) -> FamilySpec:
    with open(path) as fh:
        return family_from_json(json.load(fh))


def save_family(family: FamilySpec, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(family_to_json(family), fh, indent=2, sort_keys=True)
        fh.write("\n")
