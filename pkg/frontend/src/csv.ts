/**
 * Fixed-format CSV of stacked-realization vertices.
 *
 * Must stay byte-identical to the command-line realization export for the
 * same snapshot: same header, row order and 9-decimal formatting.
 */

export function formatCoord(v: number): string {
  const x = Object.is(v, -0) ? 0 : v;
  return x.toFixed(9);
}

export function csvFromRealization(realization: number[][][]): string {
  const rows = ["quad,corner,x,y"];
  realization.forEach((quad, qi) => {
    quad.forEach(([x, y], ci) => {
      rows.push(`${qi},${ci},${formatCoord(x)},${formatCoord(y)}`);
    });
  });
  return rows.join("\n") + "\n";
}
