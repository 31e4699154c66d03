/**
 * Render helpers: SVG strings for the live capacity trace, the stacked 2D
 * realization view and the 3D wireframe of the signed segments.  Pure
 * functions of state so they can be tested without a DOM.
 */

import type { LadderRecord, SnapshotEvent } from "./protocol.js";
import type { TracePoint } from "./state.js";
import { formatCoord } from "./csv.js";

export type Box = { w: number; h: number; pad: number };

const DEFAULT_BOX: Box = { w: 640, h: 240, pad: 24 };

export function tracePath(
  trace: TracePoint[],
  threshold: number,
  box: Box = DEFAULT_BOX,
): string {
  if (trace.length === 0) {
    return `<svg xmlns="http://www.w3.org/2000/svg" width="${box.w}" height="${box.h}"></svg>`;
  }
  const xs = trace.map((p) => p.eval);
  const ys = trace.map((p) => p.value).concat([threshold]);
  const x0 = Math.min(...xs);
  const x1 = Math.max(...xs, x0 + 1);
  const y0 = Math.min(...ys);
  const y1 = Math.max(...ys, y0 + 1e-9);
  const sx = (v: number) => box.pad + ((v - x0) / (x1 - x0)) * (box.w - 2 * box.pad);
  const sy = (v: number) => box.h - box.pad - ((v - y0) / (y1 - y0)) * (box.h - 2 * box.pad);
  // step segments, broken at restart boundaries (no smoothing across them)
  const parts: string[] = [];
  let d = "";
  for (let i = 0; i < trace.length; i++) {
    const p = trace[i];
    const move = i === 0 || trace[i - 1].restart !== p.restart;
    d += `${move ? "M" : "L"}${sx(p.eval).toFixed(1)},${sy(p.value).toFixed(1)} `;
  }
  parts.push(`<path d="${d.trim()}" fill="none" stroke="#0a6" stroke-width="1.5"/>`);
  const ty = sy(threshold).toFixed(1);
  parts.push(
    `<line x1="${box.pad}" y1="${ty}" x2="${box.w - box.pad}" y2="${ty}" ` +
      `stroke="#c33" stroke-dasharray="4 3"/>`,
  );
  for (let i = 1; i < trace.length; i++) {
    if (trace[i].restart !== trace[i - 1].restart) {
      const mx = sx(trace[i].eval).toFixed(1);
      parts.push(
        `<line x1="${mx}" y1="${box.pad}" x2="${mx}" y2="${box.h - box.pad}" ` +
          `stroke="#bbb" stroke-width="0.5"/>`,
      );
    }
  }
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${box.w}" height="${box.h}">` +
    parts.join("") +
    `</svg>`
  );
}

/** Stacked trapezoids of the minimal realization (vertices straight from
 * the snapshot; the frontend never recomputes capacities). */
export function realizationView(
  realization: number[][][],
  box: Box = { w: 260, h: 420, pad: 16 },
  highlight = -1,
): string {
  const ys = realization.flat().map((p) => p[1]);
  const y0 = Math.min(...ys);
  const y1 = Math.max(...ys, y0 + 1e-9);
  const scale = Math.min((box.w - 2 * box.pad) / 1.0, (box.h - 2 * box.pad) / (y1 - y0));
  const px = (x: number) => box.pad + x * scale;
  const py = (y: number) => box.h - box.pad - (y - y0) * scale;
  const polys = realization.map((quad, qi) => {
    const [bl, br, tl, tr] = quad;
    const pts = [bl, br, tr, tl]
      .map((p) => `${px(p[0]).toFixed(1)},${py(p[1]).toFixed(1)}`)
      .join(" ");
    const fill = qi === highlight ? "#fe8" : "none";
    return `<polygon data-quad="${qi}" points="${pts}" fill="${fill}" stroke="#333"/>`;
  });
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${box.w}" height="${box.h}">` +
    polys.join("") +
    `</svg>`
  );
}

/** Orthographic 3D wireframe of the signed segments, rotated by yaw/pitch;
 * the two T-pattern segments are highlighted. */
export function ladderView(
  ladder: LadderRecord,
  yaw = 0.6,
  tilt = 0.4,
  box: Box = { w: 320, h: 320, pad: 16 },
  highlight = -1,
): string {
  const cy = Math.cos(yaw);
  const sy_ = Math.sin(yaw);
  const ct = Math.cos(tilt);
  const st = Math.sin(tilt);
  const project = (p: number[]): [number, number] => {
    const x = p[0] * cy + p[1] * sy_;
    const yr = -p[0] * sy_ + p[1] * cy;
    const y = yr * ct + p[2] * st;
    return [x, y];
  };
  const pts2 = ladder.segments.flatMap((s) => [project(s.first), project(s.second)]);
  const xs = pts2.map((p) => p[0]);
  const ys = pts2.map((p) => p[1]);
  const x0 = Math.min(...xs);
  const x1 = Math.max(...xs, x0 + 1e-9);
  const y0 = Math.min(...ys);
  const y1 = Math.max(...ys, y0 + 1e-9);
  const scale = Math.min(
    (box.w - 2 * box.pad) / (x1 - x0),
    (box.h - 2 * box.pad) / (y1 - y0),
  );
  const px = (x: number) => box.pad + (x - x0) * scale;
  const py = (y: number) => box.h - box.pad - (y - y0) * scale;
  const lines = ladder.segments.map((seg, i) => {
    const a = project(seg.first);
    const b = project(seg.second);
    const special = i === 0 || i === ladder.specialIndex - 1;
    const color = i === highlight ? "#e80" : special ? "#c33" : "#06c";
    const width = special ? 2.5 : 1.5;
    return (
      `<line data-seg="${i}" x1="${px(a[0]).toFixed(1)}" y1="${py(a[1]).toFixed(1)}" ` +
      `x2="${px(b[0]).toFixed(1)}" y2="${py(b[1]).toFixed(1)}" ` +
      `stroke="${color}" stroke-width="${width}"/>`
    );
  });
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${box.w}" height="${box.h}">` +
    lines.join("") +
    `</svg>`
  );
}

export function signTable(perSign: Map<string, number>): string {
  const rows = [...perSign.entries()]
    .sort((a, b) => a[1] - b[1])
    .map(
      ([signs, value]) =>
        `<tr><td><code>${signs}</code></td><td>${formatCoord(value)}</td></tr>`,
    );
  return (
    `<table><thead><tr><th>signs</th><th>best</th></tr></thead><tbody>` +
    rows.join("") +
    `</tbody></table>`
  );
}

export function snapshotSummary(snap: SnapshotEvent | null): string {
  if (snap === null) return "no snapshot yet";
  return `eval ${snap.eval}: best ${formatCoord(snap.value)} (signs ${snap.signs})`;
}
