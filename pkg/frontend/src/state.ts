/**
 * View state: a pure reducer over the session event stream plus the
 * acknowledged-config bookkeeping for the control panel.
 *
 * Invariants kept here: events apply strictly in sequence order (stale or
 * duplicated events are dropped), the control panel always reflects the
 * last *acknowledged* config version, and every number in the state comes
 * from an event or an acknowledgment payload.
 */

import type { SessionEvent, SnapshotEvent } from "./protocol.js";
import { decimate } from "./decimate.js";

export type TracePoint = { eval: number; value: number; restart: number };

export type ViewState = {
  nextSeq: number;
  restart: number;
  trace: TracePoint[];
  traceLimit: number;
  snapshot: SnapshotEvent | null;
  configVersion: number;
  config: Record<string, unknown>;
  done: boolean;
  restartMarks: number[]; // evaluation indices where restarts began
};

export function initialState(traceLimit = 5000): ViewState {
  return {
    nextSeq: 0,
    restart: -1,
    trace: [],
    traceLimit,
    snapshot: null,
    configVersion: -1,
    config: {},
    done: false,
    restartMarks: [],
  };
}

export function applyEvent(state: ViewState, event: SessionEvent): ViewState {
  if (event.seq !== state.nextSeq) {
    if (event.seq < state.nextSeq) return state; // duplicate/stale
    throw new Error(`event gap: expected ${state.nextSeq}, got ${event.seq}`);
  }
  const next: ViewState = { ...state, nextSeq: state.nextSeq + 1 };
  switch (event.type) {
    case "best": {
      const pt = { eval: event.eval, value: event.value, restart: state.restart };
      let trace = [...state.trace, pt];
      if (trace.length > state.traceLimit) {
        trace = decimate(trace, state.traceLimit);
      }
      next.trace = trace;
      break;
    }
    case "snapshot":
      next.snapshot = event;
      break;
    case "restart":
      next.restart = event.index;
      next.restartMarks = [...state.restartMarks, state.trace.length];
      break;
    case "config":
      next.configVersion = event.version;
      next.config = event.config;
      break;
    case "done":
      next.done = true;
      break;
  }
  return next;
}

/** Best-so-far values are non-increasing; verify before rendering. */
export function traceIsMonotone(trace: TracePoint[]): boolean {
  for (let i = 1; i < trace.length; i++) {
    if (trace[i].value > trace[i - 1].value + 1e-15) return false;
  }
  return true;
}

/** Per-sign-component best values extracted from best events per restart. */
export function bestBySigns(
  events: { signs: string; value: number }[],
): Map<string, number> {
  const out = new Map<string, number>();
  for (const { signs, value } of events) {
    const prev = out.get(signs);
    if (prev === undefined || value < prev) out.set(signs, value);
  }
  return out;
}

/**
 * Control-panel flow: a slider change creates a pending patch; the panel
 * disables until the acknowledgment arrives.  A rejection reverts to the
 * last acknowledged config.
 */
export type ControlState = {
  acknowledged: Record<string, unknown>;
  version: number;
  pending: boolean;
};

export function controlInit(): ControlState {
  return { acknowledged: {}, version: -1, pending: false };
}

export function controlSubmit(state: ControlState): ControlState {
  if (state.pending) throw new Error("a patch is already pending");
  return { ...state, pending: true };
}

export function controlAck(
  state: ControlState,
  ack: { version: number; config: Record<string, unknown> },
): ControlState {
  return { acknowledged: ack.config, version: ack.version, pending: false };
}

export function controlReject(state: ControlState): ControlState {
  // revert: acknowledged config unchanged, pending cleared
  return { ...state, pending: false };
}

/** Client-side slider guards mirroring the service's validation. */
export function patchIsValid(patch: Record<string, number | string | boolean>): string | null {
  if ("stepMax" in patch && (patch.stepMax as number) <= 0) {
    return "step size must be positive";
  }
  if ("refreshEvals" in patch && (patch.refreshEvals as number) <= 0) {
    return "refresh budget must be positive";
  }
  if ("coercion" in patch && (patch.coercion as number) < 0) {
    return "coercion factor must be >= 0";
  }
  if ("maskA" in patch) {
    const a = patch.maskA as number;
    if (!(a >= 0 && a <= 1)) return "mask scalar must be in [0, 1]";
  }
  if ("signs" in patch && !/^[+-]+$/.test(patch.signs as string)) {
    return "signs must be a string of + and -";
  }
  return null;
}
