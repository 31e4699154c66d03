/**
 * Largest-triangle-three-buckets downsampling for hours-long traces.
 * Keeps the first and last points and the visually dominant point of each
 * bucket in between.
 */

export type XY = { eval: number; value: number };

export function decimate<T extends XY>(points: T[], limit: number): T[] {
  if (points.length <= limit || limit < 3) return points.slice(0, Math.max(limit, 0));
  const out: T[] = [points[0]];
  const bucketCount = limit - 2;
  const span = (points.length - 2) / bucketCount;
  let prev = points[0];
  for (let b = 0; b < bucketCount; b++) {
    const start = Math.floor(b * span) + 1;
    const end = Math.min(Math.floor((b + 1) * span) + 1, points.length - 1);
    const nextStart = Math.min(Math.floor((b + 1) * span) + 1, points.length - 1);
    const nextEnd = Math.min(Math.floor((b + 2) * span) + 1, points.length);
    // average of the next bucket anchors the triangle
    let ax = 0;
    let ay = 0;
    let n = 0;
    for (let i = nextStart; i < nextEnd; i++) {
      ax += points[i].eval;
      ay += points[i].value;
      n++;
    }
    if (n === 0) {
      ax = points[points.length - 1].eval;
      ay = points[points.length - 1].value;
      n = 1;
    }
    ax /= n;
    ay /= n;
    let best = points[start];
    let bestArea = -1;
    for (let i = start; i < end; i++) {
      const p = points[i];
      const area = Math.abs(
        (prev.eval - ax) * (p.value - prev.value) -
          (prev.eval - p.eval) * (ay - prev.value),
      );
      if (area > bestArea) {
        bestArea = area;
        best = p;
      }
    }
    out.push(best);
    prev = best;
  }
  out.push(points[points.length - 1]);
  return out;
}
