"""Steering service: hosts optimization runs and exposes a control protocol.

HTTP endpoints:
    GET    /families                      registry summary
    POST   /sessions                      {family, config?} -> session id
    GET    /sessions/{id}                 current state
    PATCH  /sessions/{id}                 live config patch (acknowledged)
    GET    /sessions/{id}/events?from=N   line-delimited JSON event stream
    GET    /sessions/{id}/export          run record snapshot
    DELETE /sessions/{id}                 stop the session

Events are strictly ordered per session: best-value updates, periodic ladder
snapshots (with stacked realization vertices), restart notices and config
version notices.  Patches apply between optimizer chunks, never
mid-evaluation.
"""

from __future__ import annotations

import json
import math
import threading
import time
import uuid
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import StreamingResponse
from pydantic import BaseModel

from .exports import stacked_realization, write_json
from .family import decode, dimension, get_family, registry
from .ladder import ladder_to_record
from .optimizer import OptimizerConfig, SteppableRun

#: Event throttles (seconds) and the optimizer chunk size; patches take
#: effect within one chunk.
BEST_EVENT_MIN_INTERVAL = 0.05
SNAPSHOT_MIN_INTERVAL = 0.5
CHUNK = 512


class SessionConfig(BaseModel):
    seed: int = 0
    stepMax: float = 0.05
    refreshEvals: int = 20000
    totalEvals: int = 100_000_000
    coercion: float = 0.0
    maskA: Optional[float] = None
    freezeHeights: Optional[bool] = None
    signs: Optional[str] = None


class SessionPatch(BaseModel):
    stepMax: Optional[float] = None
    refreshEvals: Optional[int] = None
    coercion: Optional[float] = None
    maskA: Optional[float] = None
    signs: Optional[str] = None
    paused: Optional[bool] = None


def _parse_signs(text: Optional[str], length: int):
    if text is None:
        return None
    if len(text) != length or any(c not in "+-" for c in text):
        raise HTTPException(422, f"signs must be {length} characters of + and -")
    return tuple(1 if c == "+" else -1 for c in text)


class Session:
    """One hosted run; a worker thread advances the optimizer in chunks and
    emits ordered events, control mutations go through a lock."""

    def __init__(self, family, config: SessionConfig):
        self.id = uuid.uuid4().hex[:12]
        self.family = family
        pinned = _parse_signs(config.signs, dimension(family)[1])
        cfg = OptimizerConfig(
            seed=config.seed,
            step_max=config.stepMax,
            refresh_evals=config.refreshEvals,
            total_evals=config.totalEvals,
            coercion=config.coercion,
            sign_policy="pinned" if pinned else "roam",
            pinned_signs=pinned,
            heights_frozen=config.freezeHeights,
            mask_a=config.maskA,
        )
        self.runner = SteppableRun(family, cfg)
        self.paused = False
        self.stopped = False
        self.config_version = 0
        self.lock = threading.Lock()
        self.events: list[dict] = []
        self.cond = threading.Condition(self.lock)
        self._last_best_emit = 0.0
        self._last_snapshot_emit = 0.0
        self._emit("config", config=self._config_view(), version=self.config_version)
        self.thread = threading.Thread(target=self._loop, daemon=True)
        self.thread.start()

    # -- config ---------------------------------------------------------

    def _config_view(self) -> dict:
        cfg = self.runner.cfg
        return {
            "seed": cfg.seed,
            "stepMax": cfg.step_max,
            "refreshEvals": cfg.refresh_evals,
            "totalEvals": cfg.total_evals,
            "coercion": cfg.coercion,
            "maskA": cfg.mask_a if cfg.mask_a is not None else self.family.mask_a,
            "signs": "".join(
                "+" if s > 0 else "-" for s in (cfg.pinned_signs or ())
            ) or None,
            "paused": self.paused,
        }

    def patch(self, patch: SessionPatch) -> dict:
        with self.lock:
            cfg = self.runner.cfg
            if patch.stepMax is not None:
                if patch.stepMax <= 0:
                    raise HTTPException(422, "stepMax must be positive")
                cfg.step_max = patch.stepMax
            if patch.refreshEvals is not None:
                if patch.refreshEvals <= 0:
                    raise HTTPException(422, "refreshEvals must be positive")
                cfg.refresh_evals = patch.refreshEvals
            if patch.coercion is not None:
                if patch.coercion < 0:
                    raise HTTPException(422, "coercion must be >= 0")
                if patch.coercion > 0 and self.runner.layout.r0 is None:
                    raise HTTPException(422, "family has no reference point")
                cfg.coercion = patch.coercion
            if patch.maskA is not None:
                if not 0.0 <= patch.maskA <= 1.0:
                    raise HTTPException(422, "maskA must be in [0, 1]")
                cfg.mask_a = patch.maskA
                self.runner.mask = self.runner.layout.mask_values(patch.maskA)
            if patch.signs is not None:
                pinned = _parse_signs(patch.signs, self.runner.L)
                cfg.sign_policy = "pinned"
                cfg.pinned_signs = pinned
            if patch.paused is not None:
                self.paused = patch.paused
            self.config_version += 1
            view = self._config_view()
            self._emit_locked("config", config=view, version=self.config_version)
            self.cond.notify_all()
            return {"version": self.config_version, "config": view}

    # -- events ----------------------------------------------------------

    def _emit_locked(self, kind: str, **payload):
        event = {"seq": len(self.events), "type": kind, **payload}
        self.events.append(event)
        self.cond.notify_all()

    def _emit(self, kind: str, **payload):
        with self.lock:
            self._emit_locked(kind, **payload)

    def _snapshot_payload(self) -> Optional[dict]:
        rec = self.runner
        if rec.best_point is None or rec.best == math.inf:
            return None
        ladder = decode(self.family, rec.best_point, rec.cfg.heights_frozen)
        state = rec.current_state()
        snap = {
            "eval": rec.evals,
            "value": rec.best,
            "ladder": ladder_to_record(ladder),
            "realization": [
                [[x, y] for x, y in quad] for quad in stacked_realization(ladder)
            ],
            "signs": state["signs"],
        }
        if rec._r is not None:
            snap["current"] = {"r": [float(v) for v in rec._r], "value": state["value"]}
        return snap

    # -- worker loop -------------------------------------------------------

    def _loop(self):
        while True:
            with self.lock:
                while self.paused and not self.stopped:
                    self.cond.wait(0.1)
                if self.stopped or self.runner.done():
                    self._emit_locked(
                        "done", eval=self.runner.evals, value=self.runner.best
                    )
                    return
                # the whole chunk advances under the lock: control patches
                # apply between chunks, never mid-evaluation
                events = self.runner.step(CHUNK)
                now = time.monotonic()
                for ridx, signs in events["restarts"]:
                    self._emit_locked("restart", index=ridx, signs=signs)
                if events["improvements"] and (
                    now - self._last_best_emit >= BEST_EVENT_MIN_INTERVAL
                ):
                    ev, val = events["improvements"][-1]
                    self._emit_locked("best", eval=ev, value=val)
                    self._last_best_emit = now
                if now - self._last_snapshot_emit >= SNAPSHOT_MIN_INTERVAL:
                    snap = self._snapshot_payload()
                    if snap is not None:
                        self._emit_locked("snapshot", **snap)
                        self._last_snapshot_emit = now

    # -- lifecycle ---------------------------------------------------------

    def stop(self):
        with self.lock:
            self.stopped = True
            self.cond.notify_all()

    def state(self) -> dict:
        with self.lock:
            return {
                "id": self.id,
                "family": self.family.name,
                "evals": self.runner.evals,
                "best": self.runner.best,
                "restarts": self.runner.restart_count,
                "paused": self.paused,
                "configVersion": self.config_version,
                "done": self.stopped or self.runner.done(),
            }


def create_app() -> FastAPI:
    app = FastAPI(title="mll steering service")
    sessions: dict[str, Session] = {}
    table_lock = threading.Lock()

    def _get(sid: str) -> Session:
        with table_lock:
            session = sessions.get(sid)
        if session is None:
            raise HTTPException(404, f"no session {sid}")
        return session

    @app.get("/families")
    def families():
        out = []
        for fam in registry():
            K, L = dimension(fam)
            out.append(
                {
                    "name": fam.name,
                    "kind": fam.kind,
                    "segments": fam.n_segments,
                    "K": K,
                    "L": L,
                    "threshold": fam.threshold,
                    "mask": list(fam.mask) if fam.mask else None,
                    "penalty": None
                    if fam.penalty is None
                    else {"i": fam.penalty.i, "j": fam.penalty.j,
                          "alpha": fam.penalty.alpha, "mu": fam.penalty.mu},
                }
            )
        return out

    @app.post("/sessions", status_code=201)
    def create_session(body: dict):
        name = body.get("family")
        try:
            fam = get_family(name)
        except KeyError:
            raise HTTPException(404, f"unknown family {name!r}")
        config = SessionConfig(**(body.get("config") or {}))
        try:
            session = Session(fam, config)
        except Exception as exc:  # bad config values
            raise HTTPException(422, str(exc))
        with table_lock:
            sessions[session.id] = session
        return {"id": session.id, "config": session._config_view()}

    @app.get("/sessions/{sid}")
    def session_state(sid: str):
        return _get(sid).state()

    @app.patch("/sessions/{sid}")
    def patch_session(sid: str, patch: SessionPatch):
        return _get(sid).patch(patch)

    @app.get("/sessions/{sid}/export")
    def export_session(sid: str):
        session = _get(sid)
        with session.lock:
            return session.runner.record().to_json()

    @app.delete("/sessions/{sid}")
    def stop_session(sid: str):
        session = _get(sid)
        session.stop()
        return {"id": sid, "stopped": True}

    @app.get("/sessions/{sid}/events")
    def stream_events(sid: str, start: int = 0, max_events: int = 0, timeout: float = 10.0):
        session = _get(sid)

        def generate():
            # copy pending events under the lock, yield outside it: the
            # generator may suspend at a yield for arbitrarily long
            idx = start
            deadline = time.monotonic() + timeout
            sent = 0
            while True:
                with session.lock:
                    if idx >= len(session.events):
                        session.cond.wait(0.05)
                    batch = list(session.events[idx:])
                idx += len(batch)
                for event in batch:
                    yield json.dumps(event, sort_keys=True) + "\n"
                    sent += 1
                    if max_events and sent >= max_events:
                        return
                    if event["type"] == "done":
                        return
                if time.monotonic() > deadline:
                    return

        return StreamingResponse(generate(), media_type="application/x-ndjson")

    @app.post("/sessions/{sid}/save")
    def save_session(sid: str, body: dict):
        session = _get(sid)
        path = body.get("path")
        if not path:
            raise HTTPException(422, "need a path")
        with session.lock:
            data = session.runner.record().to_json()
        write_json(path, data)
        return {"path": path}

    return app
