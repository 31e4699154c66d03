/**
 * Types and client helpers for the steering-service protocol.
 *
 * The service speaks plain HTTP plus an ordered line-delimited JSON event
 * stream per session; every number rendered by the UI originates from one
 * of these payloads.
 */

export type FamilyInfo = {
  name: string;
  kind: "A" | "B";
  segments: number;
  K: number;
  L: number;
  threshold: number;
  mask: (number | string)[] | null;
  penalty: { i: number; j: number; alpha: number | null; mu: number } | null;
};

export type SessionConfig = {
  seed?: number;
  stepMax?: number;
  refreshEvals?: number;
  totalEvals?: number;
  coercion?: number;
  maskA?: number | null;
  signs?: string | null;
};

export type SessionPatch = {
  stepMax?: number;
  refreshEvals?: number;
  coercion?: number;
  maskA?: number;
  signs?: string;
  paused?: boolean;
};

export type LadderRecord = {
  segments: { first: number[]; second: number[]; sign: number }[];
  kind: "cyclic" | "open";
  specialIndex: number;
};

export type SnapshotEvent = {
  seq: number;
  type: "snapshot";
  eval: number;
  value: number;
  ladder: LadderRecord;
  realization: number[][][]; // per quad: [bl, br, tl, tr] as [x, y]
  signs: string;
  current?: { r: number[]; value: number };
};

export type BestEvent = { seq: number; type: "best"; eval: number; value: number };
export type RestartEvent = { seq: number; type: "restart"; index: number; signs: string };
export type ConfigEvent = {
  seq: number;
  type: "config";
  version: number;
  config: Record<string, unknown>;
};
export type DoneEvent = { seq: number; type: "done"; eval: number; value: number };

export type SessionEvent =
  | SnapshotEvent
  | BestEvent
  | RestartEvent
  | ConfigEvent
  | DoneEvent;

export type PatchAck = { version: number; config: Record<string, unknown> };

export class ServiceClient {
  constructor(private base: string, private fetchFn: typeof fetch = fetch) {}

  async families(): Promise<FamilyInfo[]> {
    const resp = await this.fetchFn(`${this.base}/families`);
    if (!resp.ok) throw new Error(`families: ${resp.status}`);
    return resp.json();
  }

  async createSession(family: string, config: SessionConfig): Promise<string> {
    const resp = await this.fetchFn(`${this.base}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ family, config }),
    });
    if (!resp.ok) throw new Error(`create: ${resp.status}`);
    const body = await resp.json();
    return body.id;
  }

  async patchSession(id: string, patch: SessionPatch): Promise<PatchAck> {
    const resp = await this.fetchFn(`${this.base}/sessions/${id}`, {
      method: "PATCH",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(patch),
    });
    if (!resp.ok) {
      const detail = await resp.text();
      throw new Error(`patch rejected (${resp.status}): ${detail}`);
    }
    return resp.json();
  }

  /** Stream events from a sequence number, invoking onEvent per line. */
  async streamEvents(
    id: string,
    start: number,
    onEvent: (event: SessionEvent) => void,
    timeoutSeconds = 3600,
  ): Promise<void> {
    const resp = await this.fetchFn(
      `${this.base}/sessions/${id}/events?start=${start}&timeout=${timeoutSeconds}`,
    );
    if (!resp.ok || resp.body === null) throw new Error(`events: ${resp.status}`);
    const reader = resp.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      for (;;) {
        const nl = buffer.indexOf("\n");
        if (nl < 0) break;
        const line = buffer.slice(0, nl).trim();
        buffer = buffer.slice(nl + 1);
        if (line) onEvent(JSON.parse(line) as SessionEvent);
      }
    }
  }
}
