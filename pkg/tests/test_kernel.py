import math

import numpy as np
import pytest

from mll import kernel
from mll.family import CubePoint, build_layout, get_family, registry
from mll.optimizer import hill_step, restart_rng

needs_compiled = pytest.mark.skipif(
    not kernel.have_compiled(), reason="compiled kernel not built"
)


def engines_for(fam, heights_frozen=None):
    lay = build_layout(fam, heights_frozen=heights_frozen)
    return lay, kernel.make_engine(lay, "pure"), kernel.make_engine(lay, "compiled")


@needs_compiled
def test_eval_point_bitwise_equal():
    rng = np.random.default_rng(41)
    for fam in registry():
        lay, pure, comp = engines_for(fam, heights_frozen=False)
        mask = lay.mask_values(None)
        for _ in range(200):
            r = rng.uniform(0, 1, lay.K)
            signs = rng.choice([-1, 1], lay.L).astype(np.int8)
            a = pure.eval_point(r, signs, mask)
            b = comp.eval_point(r, signs, mask)
            assert a == b, fam.name  # bitwise


@needs_compiled
def test_decode_segments_bitwise_equal():
    rng = np.random.default_rng(42)
    for fam in registry():
        lay, pure, comp = engines_for(fam, heights_frozen=False)
        for _ in range(50):
            r = rng.uniform(0, 1, lay.K)
            signs = rng.choice([-1, 1], lay.L).astype(np.int8)
            assert pure.decode_segments(r, signs) == comp.decode_segments(r, signs)


@needs_compiled
def test_run_span_bitwise_equal():
    for fam in (get_family("demo"), get_family("geo3"), get_family("cross1")):
        lay, pure, comp = engines_for(fam)
        mask = lay.mask_values(None)
        for restart in range(3):
            rng1 = restart_rng(7, restart)
            rng2 = restart_rng(7, restart)
            signs = np.asarray([1] * lay.L, dtype=np.int8)
            r1 = np.asarray(pure.initial_point(rng1.random(lay.K), 0.5))
            r2 = np.asarray(comp.initial_point(rng2.random(lay.K), 0.5))
            assert np.array_equal(r1, r2)
            v1 = pure.eval_point(r1, signs, mask)
            v2 = comp.eval_point(r2, signs, mask)
            assert v1 == v2
            U1 = rng1.random((500, lay.K + 1))
            U2 = rng2.random((500, lay.K + 1))
            out1 = pure.run_span(r1, v1, v1, signs, U1, 0.05, 0.5, mask)
            out2 = comp.run_span(r2, v2, v2, signs, U2, 0.05, 0.5, mask)
            assert out1 == out2
            assert np.array_equal(r1, r2)


def test_run_span_matches_hill_step_reference():
    # the batched kernel loop must reproduce the single-step reference
    # semantics on the same Philox stream
    fam = get_family("demo")
    lay = build_layout(fam)
    eng = kernel.make_engine(lay)
    mask = lay.mask_values(None)
    K = lay.K
    signs = np.asarray([1], dtype=np.int8)

    def evaluate(pt):
        return eng.eval_point(np.asarray(pt.r), signs, mask)

    rng_a = restart_rng(123, 0)
    rng_b = restart_rng(123, 0)
    r = np.asarray(eng.initial_point(rng_a.random(K), 0.0))
    _ = rng_b.random(K)
    value = eng.eval_point(r, signs, mask)
    point = CubePoint(tuple(r), (1,))
    ref_vals = [value]
    v = value
    for _ in range(300):
        point, v, _acc = hill_step(evaluate, point, v, rng_b, 0.05)
        ref_vals.append(v)
    U = rng_a.random((300, K + 1))
    out_value, best, accepts, fails, improvements = eng.run_span(
        r, value, value, signs, U, 0.05, 0.0, mask
    )
    assert out_value == pytest.approx(ref_vals[-1], abs=1e-14)
    assert np.asarray(r) == pytest.approx(np.asarray(point.r), abs=1e-14)
    assert accepts == sum(1 for a, b in zip(ref_vals, ref_vals[1:]) if b < a)


@needs_compiled
def test_backend_selection(monkeypatch):
    lay = build_layout(get_family("demo"))
    assert kernel.make_engine(lay, "pure").backend == "pure"
    assert kernel.make_engine(lay, "compiled").backend == "compiled"
    monkeypatch.setenv("MLL_KERNEL", "pure")
    assert kernel.default_backend() == "pure"
    monkeypatch.setenv("MLL_KERNEL", "bogus")
    with pytest.raises(ValueError):
        kernel.default_backend()


def test_decode_failure_evaluates_inf():
    fam = get_family("demo")
    from dataclasses import replace

    narrow = replace(
        fam, bt_region=((0.1, 0.4), (0.2, 0.4), (0.2, 0.8), (0.1, 0.8))
    )
    lay = build_layout(narrow)
    for backend in ("pure", "compiled") if kernel.have_compiled() else ("pure",):
        eng = kernel.make_engine(lay, backend)
        r = np.zeros(lay.K)
        v = eng.eval_point(r, np.asarray([1], dtype=np.int8), lay.mask_values(None))
        assert v == math.inf
