/**
 * Browser entry point: family picker, live trace, sign table, linked 3D/2D
 * views and the control panel, wired to the steering service.
 */

import { ServiceClient, type SessionEvent } from "./protocol.js";
import {
  applyEvent,
  controlAck,
  controlInit,
  controlReject,
  controlSubmit,
  initialState,
  patchIsValid,
  type ViewState,
} from "./state.js";
import { ladderView, realizationView, signTable, snapshotSummary, tracePath } from "./views.js";

const $ = (id: string) => document.getElementById(id) as HTMLElement;

async function boot() {
  const client = new ServiceClient("");
  const families = await client.families();
  const picker = $("family") as HTMLSelectElement;
  for (const fam of families) {
    const opt = document.createElement("option");
    opt.value = fam.name;
    opt.textContent = `${fam.name} (${fam.kind}, threshold ${fam.threshold.toFixed(4)})`;
    picker.appendChild(opt);
  }

  let state: ViewState = initialState();
  let controls = controlInit();
  let session: string | null = null;
  let threshold = 0;
  const perSign = new Map<string, number>();
  let lastSigns = "";
  let hover = -1;

  function render() {
    $("trace").innerHTML = tracePath(state.trace, threshold);
    $("summary").textContent = snapshotSummary(state.snapshot);
    if (state.snapshot) {
      $("ladder3d").innerHTML = ladderView(state.snapshot.ladder, 0.6, 0.4, undefined, hover);
      $("stacked").innerHTML = realizationView(state.snapshot.realization, undefined, hover);
    }
    $("signs").innerHTML = signTable(perSign);
    const panel = $("panel") as HTMLFieldSetElement;
    (panel as unknown as { disabled: boolean }).disabled = controls.pending;
    $("status").textContent = state.done
      ? "done"
      : controls.pending
        ? "waiting for acknowledgment"
        : `config v${controls.version}`;
  }

  function onEvent(event: SessionEvent) {
    state = applyEvent(state, event);
    if (event.type === "restart") lastSigns = event.signs;
    if (event.type === "best") {
      const prev = perSign.get(lastSigns);
      if (prev === undefined || event.value < prev) perSign.set(lastSigns, event.value);
    }
    render();
  }

  async function streamWithResume(id: string) {
    // the stream ends on service timeouts or disconnects; resume from the
    // next sequence number so no event is lost or duplicated
    while (session === id && !state.done) {
      try {
        await client.streamEvents(id, state.nextSeq, onEvent, 600);
      } catch {
        await new Promise((resolve) => setTimeout(resolve, 500));
      }
    }
  }

  $("start").addEventListener("click", async () => {
    const name = picker.value;
    threshold = families.find((f) => f.name === name)?.threshold ?? 0;
    state = initialState();
    perSign.clear();
    session = await client.createSession(name, {
      seed: Number((($("seed") as HTMLInputElement) || {}).value || 0),
    });
    void streamWithResume(session);
    render();
  });

  async function sendPatch(patch: Record<string, number | string | boolean>) {
    if (!session) return;
    const reason = patchIsValid(patch);
    if (reason) {
      $("status").textContent = `rejected locally: ${reason}`;
      return;
    }
    controls = controlSubmit(controls);
    render();
    try {
      const ack = await client.patchSession(session, patch);
      controls = controlAck(controls, ack);
    } catch (err) {
      controls = controlReject(controls);
      $("status").textContent = String(err);
    }
    render();
  }

  for (const [id, key, parse] of [
    ["stepMax", "stepMax", parseFloat],
    ["refresh", "refreshEvals", (v: string) => parseInt(v, 10)],
    ["coercion", "coercion", parseFloat],
    ["maskA", "maskA", parseFloat],
  ] as const) {
    $(id).addEventListener("change", (ev) => {
      const value = parse((ev.target as HTMLInputElement).value);
      void sendPatch({ [key]: value });
    });
  }
  $("pause").addEventListener("click", () => void sendPatch({ paused: true }));
  $("resume").addEventListener("click", () => void sendPatch({ paused: false }));
  $("pinSigns").addEventListener("click", () => {
    const signs = (($("signsInput") as HTMLInputElement) || {}).value || "";
    void sendPatch({ signs });
  });

  for (const id of ["ladder3d", "stacked"]) {
    $(id).addEventListener("mousemove", (ev) => {
      const target = ev.target as SVGElement;
      const seg = target.getAttribute("data-seg") ?? target.getAttribute("data-quad");
      const next = seg === null ? -1 : parseInt(seg, 10);
      if (next !== hover) {
        hover = next;
        render();
      }
    });
  }

  render();
}

window.addEventListener("DOMContentLoaded", () => void boot());
