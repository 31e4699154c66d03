"""Run-record files, calculation reports and realization exports.

The stacked realization lists, per quadrilateral, the four planar vertices
of its minimal realization placed cumulatively: each quadrilateral's bottom
edge reuses the previous one's top edge.  All file writers are byte-stable
for identical inputs (sorted keys, fixed float formatting in CSV/SVG).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Optional

from .ladder import Ladder, ladder_quads, minimal_realization

#: Fixed decimal formatting shared by the CSV export and the frontend's
#: rendering checks.
CSV_FLOAT_FORMAT = "{:.9f}"


def stacked_realization(ladder: Ladder) -> list[list[tuple[float, float]]]:
    """Vertices (bl, br, tl, tr) of each quadrilateral's minimal realization,
    stacked so quad k's bottom edge is quad k-1's top edge."""
    out = []
    base = 0.0
    for quad in ladder_quads(ladder):
        real = minimal_realization(quad)
        b = quad.bottom.slope
        out.append(
            [
                (0.0, base),
                (1.0, base + b),
                (0.0, base + real.left_len),
                (1.0, base + b + real.right_len),
            ]
        )
        base += real.left_len
    return out


def realization_csv(ladder: Ladder) -> str:
    rows = ["quad,corner,x,y"]
    fmt = CSV_FLOAT_FORMAT.format
    for qi, verts in enumerate(stacked_realization(ladder)):
        for ci, (x, y) in enumerate(verts):
            rows.append(f"{qi},{ci},{fmt(x)},{fmt(y)}")
    return "\n".join(rows) + "\n"


def realization_svg(ladder: Ladder, width: int = 400) -> str:
    """Stacked trapezoids as SVG polylines (display plumbing only)."""
    stacks = stacked_realization(ladder)
    ys = [y for verts in stacks for _, y in verts]
    lo, hi = min(ys), max(ys)
    span = max(hi - lo, 1e-9)
    scale = width / max(1.0, span) * 0.9
    pad = 0.05 * width

    def pt(x, y):
        return f"{pad + x * scale:.2f},{pad + (hi - y) * scale:.2f}"

    polys = []
    for verts in stacks:
        bl, br, tl, tr = verts
        path = " ".join(pt(*p) for p in (bl, br, tr, tl, bl))
        polys.append(
            f'<polygon points="{path}" fill="none" stroke="black" stroke-width="1"/>'
        )
    h = pad * 2 + span * scale
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width + 2 * pad:.0f}" '
        f'height="{h:.0f}">' + "".join(polys) + "</svg>\n"
    )


@dataclass
class CalculationReport:
    family: str
    threshold: float
    best_value: float
    verdict: str
    run_file: Optional[str]
    wall_time: float
    seed: int
    rng: str

    @property
    def margin(self) -> float:
        return self.best_value - self.threshold

    def to_json(self) -> dict:
        return {
            "format": "mll-report/1",
            "family": self.family,
            "threshold": self.threshold,
            "bestValue": self.best_value,
            "margin": self.margin,
            "verdict": self.verdict,
            "runFile": self.run_file,
            "wallTime": self.wall_time,
            "seed": self.seed,
            "rng": self.rng,
        }


def make_report(family, record, run_file: Optional[str] = None) -> CalculationReport:
    margin = record.best_value - family.threshold
    verdict = "counterexample-found" if margin < 0 else "no-counterexample-found"
    return CalculationReport(
        family=family.name,
        threshold=family.threshold,
        best_value=record.best_value,
        verdict=verdict,
        run_file=run_file,
        wall_time=record.wall_time,
        seed=record.config["seed"],
        rng=record.rng,
    )


def write_json(path: str, data: dict) -> None:
    """Atomic write (write-then-rename) with stable key order."""
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def load_run_record(path: str) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    if data.get("format") != "mll-run/1":
        raise ValueError(f"not a run record: {path}")
    return data
