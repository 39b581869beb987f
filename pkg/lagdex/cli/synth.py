from __future__ import annotations

import typer

from lagdex.cli._app import app, handle_errors, run_context, stdout
from lagdex.series import MonthInterval
from lagdex.synthetic import DEFAULT_WINDOW, synthetic_registry, write_registry


@app.command()
@handle_errors
def synth(
    ctx: typer.Context,
    window: str = typer.Option(DEFAULT_WINDOW, "--window", help="YYYY-MM:YYYY-MM"),
    noise: float = typer.Option(0.0, "--noise", min=0.0, help="Price noise sd."),
):
    """Write a seeded synthetic data set and a config that reads it."""
    run = run_context(ctx)
    interval = MonthInterval.parse(window)
    registry = synthetic_registry(seed=run.seed, window=interval, noise=noise)
    out = run.output_dir()
    write_registry(registry, out, interval)
    run.outputs += sorted((out / "data").glob("*.csv"))
    run.outputs.append(out / "lagdex.yaml")
    run.finish(ctx, window=interval)
    stdout.print(f"synthetic data for {len(registry)} indices in {out}")
    stdout.print(f"run e.g.: lagdex -c {(out / 'lagdex.yaml').as_posix()} search")
