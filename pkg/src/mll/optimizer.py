"""Seeded stochastic hill climbing over family cubes.

A run is a sequence of restarts; each restart draws a fresh initial point
and sign vector, then takes random-direction steps accepted on strict
decrease.  All randomness comes from counter-based streams derived per
restart (numpy Philox keyed by (seed, restart index)), so runs with
iteration budgets are reproducible and restarts can execute on parallel
workers without changing the result.

Per restart the stream is consumed in a fixed order: optional sign draws,
K uniforms for the initial point, then one row of K+1 uniforms per
iteration (step size first, then the direction).
"""

from __future__ import annotations

import itertools
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from . import kernel
from .family import CubePoint, FamilySpec, build_layout, decode
from .ladder import ladder_to_record

RNG_ID = "numpy:philox4x64:key=[seed,restart]"

_MASK64 = (1 << 64) - 1


class ConfigError(ValueError):
    pass


@dataclass
class OptimizerConfig:
    seed: int = 0
    step_max: float = 0.05
    refresh_evals: int = 20000
    total_evals: int = 200000
    refresh_seconds: Optional[float] = None
    total_seconds: Optional[float] = None
    coercion: float = 0.0
    sign_policy: str = "roam"  # roam all 2^L components, or "pinned"
    pinned_signs: Optional[tuple[int, ...]] = None
    heights_frozen: Optional[bool] = None  # None: family default
    mask_a: Optional[float] = None  # None: family default
    workers: int = 1

    def __post_init__(self):
        if self.step_max <= 0:
            raise ConfigError("step_max must be positive")
        if self.refresh_evals <= 0 or self.total_evals <= 0:
            raise ConfigError("budgets must be positive")
        if self.refresh_seconds is not None and self.refresh_seconds <= 0:
            raise ConfigError("refresh_seconds must be positive")
        if self.total_seconds is not None and self.total_seconds <= 0:
            raise ConfigError("total_seconds must be positive")
        if self.coercion < 0:
            raise ConfigError("coercion factor must be >= 0")
        if self.sign_policy not in ("roam", "pinned"):
            raise ConfigError(f"unknown sign policy {self.sign_policy!r}")
        if self.sign_policy == "pinned":
            if self.pinned_signs is None:
                raise ConfigError("pinned sign policy needs pinned_signs")
            if any(s not in (-1, 1) for s in self.pinned_signs):
                raise ConfigError("pinned signs must be -1/+1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


@dataclass
class RunRecord:
    family: str
    config: dict
    rng: str
    best_value: float
    best_point: Optional[CubePoint]
    best_ladder: Optional[dict]
    restart_count: int
    evaluations: int
    decode_failures: int
    trace: list  # (evaluation index, best-so-far value)
    per_sign_best: dict
    wall_time: float
    backend: str

    def to_json(self) -> dict:
        return {
            "format": "mll-run/1",
            "family": self.family,
            "config": self.config,
            "rng": self.rng,
            "backend": self.backend,
            "bestValue": self.best_value,
            "bestPoint": None
            if self.best_point is None
            else {"r": list(self.best_point.r), "signs": list(self.best_point.signs)},
            "bestLadder": self.best_ladder,
            "restartCount": self.restart_count,
            "evaluations": self.evaluations,
            "decodeFailures": self.decode_failures,
            "trace": [[int(i), v] for i, v in downsample_trace(self.trace)],
            "perSignBest": self.per_sign_best,
            "wallTime": self.wall_time,
        }


def downsample_trace(trace, limit: int = 10000):
    """Keep at most limit points, always retaining the first and last."""
    if len(trace) <= limit:
        return list(trace)
    idx = np.linspace(0, len(trace) - 1, limit).astype(int)
    return [trace[i] for i in idx]


def clamp(vec) -> list[float]:
    """Componentwise nearest point of [0, 1]."""
    return [0.0 if x < 0.0 else (1.0 if x > 1.0 else float(x)) for x in vec]


def signs_to_key(signs) -> str:
    return "".join("+" if s > 0 else "-" for s in signs)


def restart_rng(seed: int, restart: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(key=np.array([seed & _MASK64, restart], dtype=np.uint64))
    )


def roam_signs(restart: int, L: int) -> list[int]:
    """Cyclic enumeration of sign components: bit i of the restart index
    flips component i."""
    return [1 if (restart >> i) & 1 == 0 else -1 for i in range(L)]


def hill_step(
    evaluate: Callable,
    current: CubePoint,
    value: float,
    rng: np.random.Generator,
    step_max: float,
    coercion: float = 0.0,
    r0=None,
):
    """Single reference hill-climbing step (the kernels batch this exact
    arithmetic): draw s in (0, step_max] and a direction in [-1,1]^K, clamp,
    coerce, accept on strict decrease."""
    K = len(current.r)
    row = rng.random(K + 1)
    s = step_max * (1.0 - row[0])
    cand = [
        (1.0 - s) * current.r[k] + s * (2.0 * row[1 + k] - 1.0) for k in range(K)
    ]
    cand = clamp(cand)
    if coercion > 0.0:
        opu = 1.0 + coercion
        cand = [(v + coercion * r0[k]) / opu for k, v in enumerate(cand)]
    cand_point = CubePoint(tuple(cand), current.signs)
    cand_value = evaluate(cand_point)
    if cand_value < value:
        return cand_point, cand_value, True
    return current, value, False


class SteppableRun:
    """One optimization run advanced in chunks; the steering service applies
    config patches between chunks."""

    def __init__(
        self,
        family: FamilySpec,
        cfg: OptimizerConfig,
        backend: Optional[str] = None,
    ):
        self.family = family
        self.cfg = cfg
        self.layout = build_layout(family, heights_frozen=cfg.heights_frozen)
        if cfg.coercion > 0 and self.layout.r0 is None:
            raise ConfigError("coercion needs a family reference point")
        if cfg.sign_policy == "pinned" and len(cfg.pinned_signs) != self.layout.L:
            raise ConfigError(
                f"pinned sign vector needs length {self.layout.L}"
            )
        self.engine = kernel.make_engine(self.layout, backend=backend)
        self.mask = self.layout.mask_values(cfg.mask_a)
        self.K = self.layout.K
        self.L = self.layout.L
        self.evals = 0
        self.restart_count = 0
        self.decode_failures = 0
        self.best = math.inf
        self.best_point: Optional[CubePoint] = None
        self.per_sign_best: dict[str, float] = {}
        self.trace: list = []
        self.start_time = time.monotonic()
        self._restart_index = -1
        self._restart_evals = 0
        self._restart_started = 0.0
        self._restart_best = math.inf
        self._r: Optional[np.ndarray] = None
        self._signs: Optional[np.ndarray] = None
        self._value = math.inf
        self._rng: Optional[np.random.Generator] = None

    # -- budgets ------------------------------------------------------------

    def done(self) -> bool:
        if self.evals >= self.cfg.total_evals:
            return True
        if self.cfg.total_seconds is not None:
            return time.monotonic() - self.start_time >= self.cfg.total_seconds
        return False

    def _restart_exhausted(self) -> bool:
        if self._restart_index < 0:
            return True
        if self._restart_evals >= self.cfg.refresh_evals:
            return True
        if self.cfg.refresh_seconds is not None:
            return time.monotonic() - self._restart_started >= self.cfg.refresh_seconds
        return False

    # -- stepping -----------------------------------------------------------

    def _signs_for(self, restart: int, rng) -> list[int]:
        if self.cfg.sign_policy == "pinned":
            return list(self.cfg.pinned_signs)
        if self.L <= 8:
            return roam_signs(restart, self.L)
        return [1 if u < 0.5 else -1 for u in rng.random(self.L)]

    def _begin_restart(self, events: dict):
        self._restart_index += 1
        self.restart_count += 1
        ridx = self._restart_index
        self._rng = restart_rng(self.cfg.seed, ridx)
        signs = self._signs_for(ridx, self._rng)
        self._signs = np.asarray(signs, dtype=np.int8)
        init = self.engine.initial_point(self._rng.random(self.K), self.cfg.coercion)
        self._r = np.asarray(init, dtype=np.float64)
        self._value = self.engine.eval_point(self._r, self._signs, self.mask)
        if self._value == math.inf:
            self.decode_failures += 1
        self._restart_evals = 1
        self._restart_started = time.monotonic()
        self._restart_best = self._value
        self.evals += 1
        events["restarts"].append((ridx, signs_to_key(signs)))
        self._note_value(self._value, self.evals - 1, events)

    def _note_value(self, value: float, eval_index: int, events: dict):
        key = signs_to_key(self._signs)
        if value < self.per_sign_best.get(key, math.inf):
            self.per_sign_best[key] = value
        if value < self.best:
            self.best = value
            self.best_point = CubePoint(
                tuple(float(v) for v in self._r), tuple(int(s) for s in self._signs)
            )
            self.trace.append((eval_index, value))
            events["improvements"].append((eval_index, value))

    def step(self, max_evals: int = 4096) -> dict:
        """Advance by at most max_evals evaluations; returns the events that
        occurred (restarts, best-value improvements)."""
        events = {"restarts": [], "improvements": []}
        remaining = min(max_evals, self.cfg.total_evals - self.evals)
        while remaining > 0 and not self.done():
            if self._restart_exhausted():
                self._begin_restart(events)
                remaining -= 1
                continue
            span = min(remaining, self.cfg.refresh_evals - self._restart_evals)
            if self.cfg.refresh_seconds is not None:
                span = min(span, 256)
            if span <= 0:
                continue
            U = self._rng.random((span, self.K + 1))
            base = self.evals
            value, rbest, accepts, fails, improvements = self.engine.run_span(
                self._r,
                self._value,
                self._restart_best,
                self._signs,
                U,
                self.cfg.step_max,
                self.cfg.coercion,
                self.mask,
            )
            self._value = value
            self._restart_best = rbest
            self.decode_failures += fails
            self.evals += span
            self._restart_evals += span
            remaining -= span
            key = signs_to_key(self._signs)
            if rbest < self.per_sign_best.get(key, math.inf):
                self.per_sign_best[key] = rbest
            span_improved = False
            for off, val in improvements:
                if val < self.best:
                    self.best = val
                    self.trace.append((base + off, val))
                    events["improvements"].append((base + off, val))
                    span_improved = True
            if span_improved:
                # acceptance is strict decrease, so once the restart value
                # drops below the global best every later accept improves it
                # too; the engine's final point attains the last improvement
                self.best_point = CubePoint(
                    tuple(float(v) for v in self._r),
                    tuple(int(s) for s in self._signs),
                )
        return events

    # -- results ------------------------------------------------------------

    def current_state(self) -> dict:
        return {
            "evals": self.evals,
            "value": self._value,
            "best": self.best,
            "restart": self._restart_index,
            "signs": signs_to_key(self._signs) if self._signs is not None else "",
        }

    def record(self) -> RunRecord:
        best_ladder = None
        if self.best_point is not None and self.best < math.inf:
            lad = decode(self.family, self.best_point, self.cfg.heights_frozen)
            best_ladder = ladder_to_record(lad)
        return RunRecord(
            family=self.family.name,
            config=asdict(self.cfg),
            rng=RNG_ID,
            best_value=self.best,
            best_point=self.best_point,
            best_ladder=best_ladder,
            restart_count=self.restart_count,
            evaluations=self.evals,
            decode_failures=self.decode_failures,
            trace=list(self.trace),
            per_sign_best=dict(sorted(self.per_sign_best.items())),
            wall_time=time.monotonic() - self.start_time,
            backend=self.engine.backend,
        )


def run(
    family: FamilySpec,
    cfg: OptimizerConfig,
    backend: Optional[str] = None,
) -> RunRecord:
    """Execute a full run; deterministic for iteration budgets and a fixed
    seed, independent of the worker count."""
    workers = cfg.workers
    env_cap = os.environ.get("MLL_THREADS")
    if env_cap:
        workers = min(workers, max(1, int(env_cap)))
    if workers > 1 and cfg.total_seconds is None and cfg.refresh_seconds is None:
        return _run_parallel(family, cfg, workers, backend)
    runner = SteppableRun(family, cfg, backend=backend)
    while not runner.done():
        runner.step(1 << 14)
    return runner.record()


def _restart_worker(family, cfg, backend, restart_indices):
    """Run a batch of restarts on one engine; returns per-restart summaries."""
    layout = build_layout(family, heights_frozen=cfg.heights_frozen)
    engine = kernel.make_engine(layout, backend=backend)
    mask = layout.mask_values(cfg.mask_a)
    K, L = layout.K, layout.L
    out = []
    for ridx in restart_indices:
        rng = restart_rng(cfg.seed, ridx)
        if cfg.sign_policy == "pinned":
            signs = list(cfg.pinned_signs)
        elif L <= 8:
            signs = roam_signs(ridx, L)
        else:
            signs = [1 if u < 0.5 else -1 for u in rng.random(L)]
        sv = np.asarray(signs, dtype=np.int8)
        r = np.asarray(engine.initial_point(rng.random(K), cfg.coercion))
        value = engine.eval_point(r, sv, mask)
        fails = 1 if value == math.inf else 0
        budget = cfg.refresh_evals - 1
        improvements = [(0, value)]
        best = value
        if budget > 0:
            U = rng.random((budget, K + 1))
            value, best, _, f2, imps = engine.run_span(
                r, value, best, sv, U, cfg.step_max, cfg.coercion, mask
            )
            fails += f2
            improvements += [(off + 1, val) for off, val in imps]
        out.append(
            {
                "restart": ridx,
                "signs": signs_to_key(signs),
                "best": best,
                "final_value": value,
                "final_r": [float(v) for v in r],
                "improvements": improvements,
                "fails": fails,
            }
        )
    return out


def _run_parallel(family, cfg, workers, backend) -> RunRecord:
    t0 = time.monotonic()
    n_restarts = (cfg.total_evals + cfg.refresh_evals - 1) // cfg.refresh_evals
    # the last restart may be truncated by the total budget; run it alone
    last_len = cfg.total_evals - (n_restarts - 1) * cfg.refresh_evals
    full_indices = list(range(n_restarts - 1))
    batches = [b for b in (full_indices[w::workers] for w in range(workers)) if b]
    results = []
    if batches:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(
                lambda idxs: _restart_worker(family, cfg, backend, idxs), batches
            ):
                results.extend(part)
    trunc_cfg = OptimizerConfig(**{**asdict(cfg), "refresh_evals": last_len})
    results.extend(_restart_worker(family, trunc_cfg, backend, [n_restarts - 1]))
    results.sort(key=lambda d: d["restart"])

    best = math.inf
    best_restart = None
    trace = []
    per_sign = {}
    fails = 0
    for res in results:
        base = res["restart"] * cfg.refresh_evals
        fails += res["fails"]
        key = res["signs"]
        if res["best"] < per_sign.get(key, math.inf):
            per_sign[key] = res["best"]
        for off, val in res["improvements"]:
            if val < best:
                best = val
                trace.append((base + off, val))
                best_restart = res
    best_point = None
    best_ladder = None
    if best_restart is not None and best < math.inf:
        signs = tuple(1 if c == "+" else -1 for c in best_restart["signs"])
        best_point = CubePoint(tuple(best_restart["final_r"]), signs)
        lad = decode(family, best_point, cfg.heights_frozen)
        best_ladder = ladder_to_record(lad)
    return RunRecord(
        family=family.name,
        config=asdict(cfg),
        rng=RNG_ID,
        best_value=best,
        best_point=best_point,
        best_ladder=best_ladder,
        restart_count=n_restarts,
        evaluations=cfg.total_evals,
        decode_failures=fails,
        trace=trace,
        per_sign_best=dict(sorted(per_sign.items())),
        wall_time=time.monotonic() - t0,
        backend=kernel.default_backend() if backend is None else backend,
    )


def grid_probe(
    family: FamilySpec,
    points_per_axis: int,
    cap: int = 100000,
    seed: int = 0,
    backend: Optional[str] = None,
) -> float:
    """Coarse sanity sweep: min objective over a small grid (or a stratified
    sample when the grid would exceed cap points)."""
    if not 1 <= points_per_axis <= 3:
        raise ValueError("points_per_axis must be 1, 2 or 3")
    layout = build_layout(family)
    engine = kernel.make_engine(layout, backend=backend)
    mask = layout.mask_values(None)
    K, L = layout.K, layout.L
    axis = {1: [0.5], 2: [0.0, 1.0], 3: [0.0, 0.5, 1.0]}[points_per_axis]
    n_grid = points_per_axis ** K * (1 << L)
    best = math.inf
    if n_grid <= cap:
        for signs_idx in range(1 << L):
            sv = np.asarray(roam_signs(signs_idx, L), dtype=np.int8)
            for combo in itertools.product(axis, repeat=K):
                r = np.asarray(combo, dtype=np.float64)
                v = engine.eval_point(r, sv, mask)
                if v < best:
                    best = v
    else:
        rng = restart_rng(seed, 0)
        pts = rng.random((cap, K))
        for i in range(cap):
            sv = np.asarray(roam_signs(i, L), dtype=np.int8)
            v = engine.eval_point(pts[i], sv, mask)
            if v < best:
                best = v
    return best
