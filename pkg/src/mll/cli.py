"""Command line front door: list families, run calculations, verify, export
realizations and launch the steering service.

Exit codes for `run`: 0 = no counterexample found, 2 = counterexample found,
1 = error.
"""

from __future__ import annotations

import json
import os
import sys

import click

from . import exports, kernel, verify
from .family import (
    build_layout,
    dimension,
    family_to_json,
    get_family,
    load_family,
    registry,
)
from .ladder import ladder_from_record
from .optimizer import OptimizerConfig, grid_probe, run as run_optimizer


@click.group()
def main():
    """Moebius ladder lab."""


@main.command("list")
def cmd_list():
    """Table of registered families."""
    click.echo(
        f"{'name':10s} {'kind':4s} {'N':>2s} {'K':>3s} {'L':>2s} "
        f"{'threshold':>10s} {'mask':16s} {'penalty':14s}"
    )
    for fam in registry():
        K, L = dimension(fam)
        mask = ",".join(str(e) for e in fam.mask) if fam.mask else "-"
        pen = "-"
        if fam.penalty is not None:
            p = fam.penalty
            alpha = f"a{p.alpha};" if p.alpha else ""
            pen = f"{alpha}({p.i},{p.j}) mu={p.mu:g}"
        click.echo(
            f"{fam.name:10s} {fam.kind:4s} {fam.n_segments:2d} {K:3d} {L:2d} "
            f"{fam.threshold:10.6f} {mask:16s} {pen:14s}"
        )


def _resolve_family(name, family_file):
    if family_file:
        return load_family(family_file)
    if not name:
        raise click.UsageError("need --family or --family-file")
    return get_family(name)


def _parse_signs(text):
    if not text:
        return None
    out = []
    for ch in text:
        if ch == "+":
            out.append(1)
        elif ch == "-":
            out.append(-1)
        else:
            raise click.UsageError("--signs takes a string of + and -")
    return tuple(out)


@main.command("run")
@click.option("--family", "family_name", help="registered family name")
@click.option("--family-file", type=click.Path(exists=True), help="family JSON file")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--budget-evals", type=int, default=5_000_000, show_default=True)
@click.option("--budget-seconds", type=float, default=600.0, show_default=True)
@click.option("--refresh-evals", type=int, default=20000, show_default=True)
@click.option("--refresh-seconds", type=float, default=None)
@click.option("--step-max", type=float, default=0.05, show_default=True)
@click.option("--coercion", type=float, default=None, help="default: family setting")
@click.option("--mask-a", type=float, default=None, help="mask scalar a override")
@click.option("--freeze-heights/--free-heights", "freeze", default=None)
@click.option("--signs", default=None, help="pin the sign vector, e.g. '+-'")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), default=".", show_default=True)
def cmd_run(
    family_name, family_file, seed, budget_evals, budget_seconds, refresh_evals,
    refresh_seconds, step_max, coercion, mask_a, freeze, signs, workers, out_dir,
):
    """Run one calculation and write run/report files."""
    fam = _resolve_family(family_name, family_file)
    pinned = _parse_signs(signs)
    cfg = OptimizerConfig(
        seed=seed,
        step_max=step_max,
        refresh_evals=refresh_evals,
        total_evals=budget_evals,
        refresh_seconds=refresh_seconds,
        total_seconds=budget_seconds,
        coercion=fam.default_coercion if coercion is None else coercion,
        sign_policy="pinned" if pinned else "roam",
        pinned_signs=pinned,
        heights_frozen=freeze,
        mask_a=mask_a,
        workers=workers,
    )
    record = run_optimizer(fam, cfg)
    os.makedirs(out_dir, exist_ok=True)
    stem = os.path.join(out_dir, f"{fam.name}-seed{seed}")
    run_path = stem + ".run.json"
    exports.write_json(run_path, record.to_json())
    report = exports.make_report(fam, record, run_file=run_path)
    exports.write_json(stem + ".report.json", report.to_json())
    click.echo(
        f"{fam.name}: best {record.best_value:.9f} vs threshold "
        f"{fam.threshold:.9f} (margin {report.margin:+.2e}) -> {report.verdict}"
    )
    click.echo(f"wrote {run_path}")
    sys.exit(2 if report.verdict == "counterexample-found" else 0)


@main.command("verify")
@click.option(
    "--suite",
    type=click.Choice(sorted(verify.SUITES)),
    multiple=True,
    help="suite(s) to run; default: all",
)
def cmd_verify(suite):
    """Run the oracle/invariant/desk-reproduction suites."""
    names = list(suite) or ["kernel", "families", "paper-numbers"]
    ok = True
    for name in names:
        click.echo(f"== suite {name} ==")
        ok = verify.run_suite(name, echo=click.echo) and ok
    sys.exit(0 if ok else 1)


@main.command("export")
@click.argument("run_file", type=click.Path(exists=True))
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["ladder-json", "realization-csv", "realization-svg"]),
    default="realization-csv",
    show_default=True,
)
@click.option("--out", "out_file", type=click.Path(), default=None)
def cmd_export(run_file, fmt, out_file):
    """Export the best ladder of a run record."""
    data = exports.load_run_record(run_file)
    if data.get("bestLadder") is None:
        raise click.ClickException("run record has no best ladder")
    ladder = ladder_from_record(data["bestLadder"])
    if fmt == "ladder-json":
        text = json.dumps(data["bestLadder"], indent=2, sort_keys=True) + "\n"
        suffix = ".ladder.json"
    elif fmt == "realization-csv":
        text = exports.realization_csv(ladder)
        suffix = ".realization.csv"
    else:
        text = exports.realization_svg(ladder)
        suffix = ".realization.svg"
    if out_file is None:
        out_file = run_file.replace(".run.json", "") + suffix
    with open(out_file, "w") as fh:
        fh.write(text)
    click.echo(f"wrote {out_file}")


@main.command("probe")
@click.option("--family", "family_name", required=True)
@click.option("--points-per-axis", type=int, default=1, show_default=True)
def cmd_probe(family_name, points_per_axis):
    """Coarse grid probe of a family's objective."""
    fam = get_family(family_name)
    val = grid_probe(fam, points_per_axis)
    click.echo(f"{fam.name}: probe minimum {val:.9f} (threshold {fam.threshold:.9f})")


@main.command("families-export")
@click.option("--out", "out_dir", type=click.Path(), default="families", show_default=True)
def cmd_families_export(out_dir):
    """Write every registered family to a JSON definition file."""
    os.makedirs(out_dir, exist_ok=True)
    for fam in registry():
        path = os.path.join(out_dir, f"{fam.name}.json")
        exports.write_json(path, family_to_json(fam))
    click.echo(f"wrote {len(registry())} families to {out_dir}/")


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8787, show_default=True)
def cmd_serve(host, port):
    """Launch the steering service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port, log_level="warning")


@main.command("bench")
@click.option("--family", "family_name", default="geo3", show_default=True)
@click.option("--evals", type=int, default=200000, show_default=True)
def cmd_bench(family_name, evals):
    """Compare pure and compiled kernel throughput."""
    import time

    import numpy as np

    fam = get_family(family_name)
    lay = build_layout(fam)
    backends = ["pure"] + (["compiled"] if kernel.have_compiled() else [])
    for backend in backends:
        eng = kernel.make_engine(lay, backend)
        mask = lay.mask_values(None)
        n = evals if backend == "compiled" else max(1000, evals // 50)
        r = np.full(lay.K, 0.5)
        signs = np.ones(lay.L, dtype=np.int8)
        v = eng.eval_point(r, signs, mask)
        U = np.random.default_rng(0).random((n, lay.K + 1))
        t0 = time.perf_counter()
        eng.run_span(r, v, v, signs, U, 0.05, 0.0, mask)
        dt = time.perf_counter() - t0
        click.echo(f"{backend:9s} {n / dt / 1e6:7.3f} M evals/s ({dt / n * 1e9:7.1f} ns/eval)")


if __name__ == "__main__":
    main()
