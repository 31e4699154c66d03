"""Acceptance criteria, one test per criterion, each printing a pass/fail
line (run with `pytest -s tests/test_acceptance.py` to see them inline).

Search-based criteria use fixed seeds and iteration budgets; every run here
completes well inside the ten-minute desk ceiling per calculation.  Criterion
6 (the controls must falsify) is implemented exactly as stated and is
expected to fail: the control families genuinely contain below-threshold
members (see test_control_members.py, which verifies frozen counterexample
points directly), but those members sit in attraction basins measured at
roughly 1e-24 of the cube volume, the flat optimum ridge at exactly
2*sqrt(3) freezes strict-decrease climbers wherever they first land (no
plateau drift), and the capacity's max-form kinks give the connecting
valleys measure-near-zero descent cones for random-direction steps.  No
combination of seed, step size, refresh, coercion or sign policy reached
them in extensive calibration (simplex descent finds them readily, but that
is outside this optimizer's contract).
"""

import math

import numpy as np
import pytest

from mll.family import (
    CubePoint,
    build_layout,
    coerce,
    decode,
    get_family,
    registry,
    validate,
)
from mll.geom import chi, chi_variant, crossing_oracle
from mll.ladder import (
    SignedSegment3,
    diag_capacity,
    ladder_capacity,
    make_quad,
    quad_capacity,
    quad_capacity0,
    quad_capacity_u,
)
from mll.optimizer import OptimizerConfig, clamp, run
from mll.reference import SQRT3

TWO_S3 = 2.0 * SQRT3


def report(criterion: str, ok: bool, detail: str):
    print(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
    assert ok, f"{criterion}: {detail}"


def random_quad(rng):
    def seg():
        first = rng.uniform(-2, 2, 3)
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        ln = rng.uniform(1.0, 2.5)
        return SignedSegment3(
            tuple(first), tuple(first + ln * d), int(rng.choice([-1, 1]))
        )

    return make_quad(seg(), seg())


def scan_capacity(q, n=100001, span=12.0):
    d = q.bottom.slope - q.top.slope
    offs = np.linspace(0.0, span, n)
    feas = (offs >= q.left_len) & (offs - d >= q.right_len)
    if not feas.any():
        return math.inf
    i = int(np.argmax(feas))
    hi = offs[i]
    lo = offs[i - 1] if i else hi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if mid >= q.left_len and mid - d >= q.right_len:
            hi = mid
        else:
            lo = mid
    return 2.0 * hi - d


def test_criterion_01_capacity_oracle_equivalence():
    # 10^3 seeded random quadrilaterals within 1e-9, < 5 s
    rng = np.random.default_rng(2001)
    worst = 0.0
    for _ in range(1000):
        q = random_quad(rng)
        worst = max(worst, abs(quad_capacity(q) - scan_capacity(q)))
    report("criterion 1 (capacity oracle)", worst < 1e-9, f"max deviation {worst:.2e}")


def test_criterion_02_degenerate_quadrilateral():
    bottom = SignedSegment3((0, 0, 0), (1, 0, 0), 0)
    top = SignedSegment3((0.5, math.sqrt(3) / 2, 0), (1, 0, 0), 0)
    q = make_quad(bottom, top)
    k0, k1 = quad_capacity0(q), quad_capacity(q)
    ok = abs(k0 - 1.0) < 1e-12 and abs(k1 - 2.0) < 1e-12
    report("criterion 2 (degenerate quad)", ok, f"capacity0={k0}, capacity={k1}")


def test_criterion_03_crossing_characterization():
    rng = np.random.default_rng(2003)
    drop_positions = {1: 1, 2: 0, 3: 3, 4: 2}  # ratio vector (s, 1-s, t, 1-t)
    single_neg_checked = {a: 0 for a in (1, 2, 3, 4)}
    for _ in range(10000):
        pts = rng.uniform(-2, 2, (4, 2))
        s1 = (tuple(pts[0]), tuple(pts[1]))
        s2 = (tuple(pts[2]), tuple(pts[3]))
        v = chi(s1, s2)
        res = crossing_oracle(s1, s2)
        assert 0.0 <= v <= 1.0
        assert (v > 0) == res.crosses
        if res.crosses:
            for alpha in (1, 2, 3, 4):
                assert chi_variant(alpha, s1, s2) > 0.0
        elif not res.degenerate:
            ratios = (res.s, 1 - res.s, res.t, 1 - res.t)
            negs = [i for i, qq in enumerate(ratios) if qq < 0]
            if len(negs) == 1:
                for alpha in (1, 2, 3, 4):
                    va = chi_variant(alpha, s1, s2)
                    if drop_positions[alpha] == negs[0]:
                        assert va > 0.0
                        single_neg_checked[alpha] += 1
                    else:
                        assert va == 0.0
    ok = all(n > 50 for n in single_neg_checked.values())
    report(
        "criterion 3 (crossing characterization)",
        ok,
        f"variant positives per case {single_neg_checked}",
    )


def test_criterion_04_reference_normalization():
    worst = 0.0
    for fam in registry():
        if not fam.name.startswith("geo"):
            continue
        cap = ladder_capacity(decode(fam, fam.reference))
        want = TWO_S3 if fam.kind == "A" else SQRT3
        worst = max(worst, abs(cap - want))
    report("criterion 4 (reference normalization)", worst < 1e-6, f"max error {worst:.2e}")


def test_criterion_05_demo_reproduction():
    cfg = OptimizerConfig(seed=1, total_evals=1_000_000, refresh_evals=20000)
    rec = run(get_family("demo"), cfg)
    lo, hi = SQRT3 - 0.02, SQRT3 - 0.015
    ok = lo < rec.best_value <= hi
    report(
        "criterion 5 (demo reproduction)",
        ok,
        f"best {rec.best_value:.6f} in ({lo:.6f}, {hi:.6f}]",
    )


def _control_run(name):
    fam = get_family(name)
    cfg = OptimizerConfig(seed=1, total_evals=20_000_000, refresh_evals=50_000)
    rec = run(fam, cfg)
    return fam, rec


@pytest.mark.parametrize("name", ["cross1X", "geo33", "geo3X"])
def test_criterion_06_controls_falsify(name):
    fam, rec = _control_run(name)
    found = rec.best_value < fam.threshold
    report(
        f"criterion 6 (control {name} falsifies)",
        found,
        f"best {rec.best_value:.6f} vs threshold {fam.threshold:.6f} "
        f"(margin {rec.best_value - fam.threshold:+.2e}); below-threshold members "
        "exist (test_control_members.py) but their basins are unreachable by "
        "dart hill climbing (module docstring)",
    )


def test_criterion_07_cross_calculations():
    details = []
    ok = True
    for name, floor in (
        ("cross1", TWO_S3),
        ("cross2", TWO_S3 + 0.05),
        ("cross3", TWO_S3 + 0.05),
        ("cross4", TWO_S3 + 0.05),
        ("cross5", TWO_S3 + 0.05),
    ):
        cfg = OptimizerConfig(seed=1, total_evals=5_000_000, refresh_evals=50_000)
        rec = run(get_family(name), cfg)
        ok = ok and rec.best_value >= floor
        details.append(f"{name} {rec.best_value - TWO_S3:+.4f}")
    report("criterion 7 (cross calculations)", ok, " ".join(details))


def test_criterion_08_geo_calculations_with_masks():
    details = []
    ok = True
    for name in ("geo1", "geo2", "geo3", "geo4", "geo5"):
        fam = get_family(name)
        cfg = OptimizerConfig(seed=1, total_evals=5_000_000, refresh_evals=50_000)
        rec = run(fam, cfg)
        ok = ok and rec.best_value >= fam.threshold
        details.append(f"{name} {rec.best_value - fam.threshold:+.4f}")
    report("criterion 8 (geo calculations, a=0.36)", ok, " ".join(details))


def test_criterion_09_property_suite():
    rng = np.random.default_rng(2009)
    # capacity chain and u-monotonicity on 10^3 random quadrilaterals
    for _ in range(1000):
        q = random_quad(rng)
        k0, k1, kd = quad_capacity0(q), quad_capacity(q), diag_capacity(q)
        assert k0 <= k1 + 1e-12 <= kd + 2e-12
        prev = k0
        for u in np.linspace(0, 1, 11):
            ku = quad_capacity_u(q, u)
            assert ku >= prev - 1e-12
            prev = ku
    # mask monotonicity on random ladders
    fam = get_family("geo3")
    lay = build_layout(fam)
    for _ in range(50):
        pt = CubePoint(
            tuple(rng.uniform(0, 1, lay.K)),
            tuple(int(s) for s in rng.choice([-1, 1], lay.L)),
        )
        lad = decode(fam, pt)
        u = rng.uniform(0, 1, fam.quad_count)
        k = rng.integers(0, fam.quad_count)
        bumped = u.copy()
        bumped[k] = min(1.0, bumped[k] + rng.uniform(0, 1))
        assert ladder_capacity(lad, bumped) >= ladder_capacity(lad, u) - 1e-12
    # coerce identity and fixed point
    r = list(rng.uniform(0, 1, 9))
    r0 = list(rng.uniform(0, 1, 9))
    assert coerce(r, r0, 0.0) == r
    assert coerce(r0, r0, 5.0) == pytest.approx(r0, abs=1e-15)
    # clamp idempotence
    v = [-0.5, 0.2, 1.7]
    assert clamp(clamp(v)) == clamp(v)
    # decode determinism and validate round trip on every registry family
    for fam in registry():
        lay = build_layout(fam)
        pt = CubePoint(
            tuple(rng.uniform(0, 1, lay.K)),
            tuple(int(s) for s in rng.choice([-1, 1], lay.L)),
        )
        lad = decode(fam, pt)
        assert lad == decode(fam, pt)
        assert validate(fam, lad).ok
    report("criterion 9 (property suite)", True, "all properties hold")


def test_criterion_10_reproducibility():
    fam = get_family("geo33")
    cfg = dict(seed=42, total_evals=100_000, refresh_evals=20_000)
    rec1 = run(fam, OptimizerConfig(**cfg))
    rec2 = run(fam, OptimizerConfig(**cfg))
    ok = (
        rec1.trace == rec2.trace
        and rec1.best_value == rec2.best_value
        and hash(tuple(map(tuple, rec1.trace))) == hash(tuple(map(tuple, rec2.trace)))
        and rec1.per_sign_best == rec2.per_sign_best
    )
    report("criterion 10 (reproducibility)", ok, f"traces hash-equal ({len(rec1.trace)} entries)")
