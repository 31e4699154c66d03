import json
import math

import numpy as np
import pytest

from mll.family import (
    BETA,
    CubePoint,
    DecodeError,
    FamilyError,
    FamilySpec,
    PitchSpec,
    build_layout,
    clamp_unit,
    coerce,
    decode,
    dimension,
    family_from_json,
    family_to_json,
    fixed_pitch,
    get_family,
    lerp,
    objective,
    registry,
    validate,
)
from mll.ladder import (
    SignedSegment3,
    enhanced_capacity,
    ladder_capacity,
)
from mll.reference import SQRT3

S3 = SQRT3


def random_point(fam, rng):
    K, L = dimension(fam)
    return CubePoint(
        tuple(rng.uniform(0, 1, K)), tuple(int(s) for s in rng.choice([-1, 1], L))
    )


def test_lerp_examples():
    assert lerp(0, BETA, 0) == 0
    assert lerp(0, BETA, 1) == BETA
    assert lerp(2, 4, 0.25) == pytest.approx(2.5)


def test_coerce():
    r = [0.2, 0.8, 0.5]
    r0 = [0.4, 0.4, 0.4]
    assert coerce(r, r0, 0.0) == r
    assert coerce(r0, r0, 17.0) == pytest.approx(r0)
    near = coerce(r, r0, 1e6)
    assert max(abs(a - b) for a, b in zip(near, r0)) < 1e-6
    with pytest.raises(ValueError):
        coerce(r, r0, -1.0)


def test_coerce_stays_in_box_and_monotone():
    rng = np.random.default_rng(31)
    for _ in range(200):
        r = rng.uniform(0, 1, 6)
        r0 = rng.uniform(0, 1, 6)
        u1, u2 = sorted(rng.uniform(0, 50, 2))
        c1 = coerce(r, r0, u1)
        c2 = coerce(r, r0, u2)
        assert all(0.0 <= v <= 1.0 for v in c1)
        d1 = max(abs(a - b) for a, b in zip(c1, r0))
        d2 = max(abs(a - b) for a, b in zip(c2, r0))
        assert d2 <= d1 + 1e-12


def test_clamp_unit():
    assert clamp_unit([1.2, -0.3, 0.5]) == [1.0, 0.0, 0.5]
    assert clamp_unit(clamp_unit([3.0, -2.0])) == [1.0, 0.0]


def test_registry_shape():
    fams = registry()
    assert len(fams) == 15
    names = [f.name for f in fams]
    good = ["cross1", "cross2", "cross3", "cross4", "cross5",
            "geo1", "geo2", "geo3", "geo4", "geo5"]
    assert all(n in names for n in good)
    assert all(n in names for n in ["cross1X", "geo33", "geo3X", "geo31", "demo"])
    geo2 = get_family("geo2")
    assert geo2.special_index == 4
    assert geo2.kind == "B"
    demo = get_family("demo")
    assert demo.kind == "B"
    assert demo.n_segments == 3
    assert demo.quad_count == 2
    for f in fams:
        if f.name.startswith("cross"):
            assert f.penalty is not None and f.penalty.mu == 128.0
        if f.kind == "A" and f.name != "demo":
            assert f.threshold == pytest.approx(2 * S3)
    assert get_family("demo").threshold == pytest.approx(S3 - 0.02)
    with pytest.raises(KeyError):
        get_family("nope")


def test_dimensions_match_layout_rule():
    expected = {
        "cross1": (15, 2), "cross2": (15, 2), "cross3": (15, 2),
        "cross4": (15, 2), "cross5": (15, 2), "cross1X": (15, 2),
        "geo1": (14, 2), "geo2": (14, 2), "geo3": (24, 4),
        "geo4": (24, 4), "geo5": (24, 4), "geo31": (24, 4),
        "geo33": (14, 2), "geo3X": (19, 3), "demo": (9, 1),
    }
    for fam in registry():
        assert dimension(fam) == expected[fam.name]


def test_pitch_spec_ranges():
    spec = PitchSpec(0, 1, widen_lo=True)
    assert spec.eff_lo == pytest.approx(-math.pi / 30)
    assert spec.eff_hi == pytest.approx(math.pi / 12)
    with pytest.raises(FamilyError):
        PitchSpec(3, 1)
    for fam in registry():
        for p in fam.pitches:
            assert -math.pi / 2 < p.eff_lo <= p.eff_hi < 3 * math.pi / 2


def test_reference_normalization():
    for fam in registry():
        lad = decode(fam, fam.reference)
        cap = ladder_capacity(lad)
        want = 2 * S3 if fam.kind == "A" else S3
        assert cap == pytest.approx(want, abs=1e-6), fam.name


def test_decode_b_zero():
    fam = get_family("demo")
    lad = decode(fam, fam.reference)
    b1 = lad.segments[0]
    assert b1.length == pytest.approx(1.0)
    assert b1.sign == 0
    assert b1.second == (0.0, 0.0, 0.0)


def test_decode_planar_when_heights_centered():
    rng = np.random.default_rng(33)
    fam = get_family("geo3")
    K, L = dimension(fam)
    lay = build_layout(fam)
    r = list(rng.uniform(0, 1, K))
    for k in range(fam.n_segments):
        if lay.h_var1[k] >= 0:
            r[lay.h_var1[k]] = 0.5
            r[lay.h_var2[k]] = 0.5
    pt = CubePoint(tuple(r), tuple(int(s) for s in rng.choice([-1, 1], L)))
    lad = decode(fam, pt, heights_frozen=False)
    for seg in lad.segments:
        assert seg.first[2] == 0.0 and seg.second[2] == 0.0


def test_decode_deterministic_bitwise():
    rng = np.random.default_rng(34)
    for fam in registry():
        pt = random_point(fam, rng)
        a = decode(fam, pt)
        b = decode(fam, pt)
        assert a == b  # exact dataclass equality, bitwise coordinates


def test_decode_continuity():
    rng = np.random.default_rng(35)
    for fam in registry():
        pt = random_point(fam, rng)
        base = decode(fam, pt)
        r2 = tuple(min(1.0, v + 1e-9) for v in pt.r)
        moved = decode(fam, CubePoint(r2, pt.signs))
        disp = max(
            max(abs(a - b) for a, b in zip(s1.first, s2.first))
            for s1, s2 in zip(base.segments, moved.segments)
        )
        assert disp <= 1e-6


def test_decode_validate_roundtrip():
    rng = np.random.default_rng(36)
    for fam in registry():
        for _ in range(50):
            pt = random_point(fam, rng)
            lad = decode(fam, pt)
            diag = validate(fam, lad)
            assert diag.ok, (fam.name, diag.violations)


def test_containment_exact():
    rng = np.random.default_rng(37)
    from mll.geom import left_endpoint, right_endpoint

    for fam in registry():
        if not fam.constraints:
            continue
        for _ in range(200):
            pt = random_point(fam, rng)
            lad = decode(fam, pt)
            for c in fam.constraints:
                src = lad.segments[c.source - 1].planar()
                con = lad.segments[c.container - 1].planar()
                tip = right_endpoint(src) if c.endpoint == "right" else left_endpoint(src)
                vx, vy = con[1][0] - con[0][0], con[1][1] - con[0][1]
                wx, wy = tip[0] - con[0][0], tip[1] - con[0][1]
                norm = math.hypot(vx, vy)
                assert abs(vx * wy - vy * wx) / norm < 1e-12
                param = (wx * vx + wy * vy) / (norm * norm)
                assert -1e-12 <= param <= 1.0 + 1e-12


def test_decode_argument_errors():
    fam = get_family("demo")
    K, L = dimension(fam)
    with pytest.raises(DecodeError):
        decode(fam, CubePoint((0.5,) * (K - 1), (1,) * L))
    with pytest.raises(DecodeError):
        decode(fam, CubePoint((0.5,) * K, (0,) * L))
    with pytest.raises(DecodeError):
        decode(fam, CubePoint((1.5,) + (0.5,) * (K - 1), (1,) * L))


def test_empty_bt_slice_is_decode_error():
    fam = get_family("demo")
    # region whose b-range starts above 0: decoding b=0 has no t-interval
    narrow = family_from_json(family_to_json(fam))
    narrow = FamilySpec(
        **{
            **{f: getattr(narrow, f) for f in (
                "name", "kind", "pitches", "special_index", "constraints",
                "penalty", "mask", "mask_a", "threshold", "max_free_length",
                "center_mode", "heights_frozen", "reference", "ref_centers",
                "default_coercion",
            )},
            "bt_region": ((0.1, 0.4), (0.2, 0.4), (0.2, 0.8), (0.1, 0.8)),
        }
    )
    K, L = dimension(narrow)
    with pytest.raises(DecodeError):
        decode(narrow, CubePoint((0.0,) * K, (1,) * L))


def test_objective_matches_ladder_ops():
    rng = np.random.default_rng(38)
    for fam in registry():
        ev = objective(fam)
        for _ in range(20):
            pt = random_point(fam, rng)
            lad = decode(fam, pt)
            if fam.penalty is not None:
                want = enhanced_capacity(lad, fam.penalty, fam.mask_values())
            else:
                want = ladder_capacity(lad, fam.mask_values())
            assert ev(pt) == pytest.approx(want, rel=1e-12), fam.name


def test_mask_values():
    geo1 = get_family("geo1")
    assert geo1.mask_values() == [0.36, 0.36, 0.0, 0.0]
    assert geo1.mask_values(0.5) == [0.5, 0.5, 0.0, 0.0]
    assert get_family("cross1").mask_values() == [1.0] * 4
    with pytest.raises(ValueError):
        geo1.mask_values(1.5)


def test_family_json_roundtrip(tmp_path):
    rng = np.random.default_rng(39)
    for fam in registry():
        data = family_to_json(fam)
        back = family_from_json(json.loads(json.dumps(data)))
        assert back == fam
        pt = random_point(fam, rng)
        assert decode(back, pt) == decode(fam, pt)


def test_validate_flags_violations():
    fam = get_family("demo")
    lad = decode(fam, fam.reference)
    segs = list(lad.segments)
    # pitch of the middle segment pushed outside its fixed range
    bad = SignedSegment3(segs[1].first, (segs[1].second[0] + 0.5, segs[1].second[1], 0.0), 1)
    diag = validate(fam, type(lad)((segs[0], bad, segs[2]), lad.kind, lad.special_index))
    assert any("pitch" in v[0] for v in diag.violations)
    # height violation
    tall = SignedSegment3(segs[1].first, (segs[1].second[0], segs[1].second[1], 0.7), 1)
    diag2 = validate(fam, type(lad)((segs[0], tall, segs[2]), lad.kind, lad.special_index))
    assert any("height" in v[0] for v in diag2.violations)


def test_family_spec_guards():
    with pytest.raises(FamilyError):
        FamilySpec("x", "A", (fixed_pitch(1), fixed_pitch(6)), 2)  # first pitch not 0
    with pytest.raises(FamilyError):
        FamilySpec("x", "A", (fixed_pitch(0), fixed_pitch(5)), 2)  # special not 6
    with pytest.raises(FamilyError):
        FamilySpec("x", "A", (fixed_pitch(0), fixed_pitch(6)), 5)  # j out of range
