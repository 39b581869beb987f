from __future__ import annotations

import typer

from lagdex.cli._app import app, handle_errors, run_context, stdout
from lagdex.ingest import build_registry
from lagdex.search import compare_named_models
from lagdex.series import MonthInterval


@app.command()
@handle_errors
def compare(
    ctx: typer.Context,
    window: str = typer.Option(None, "--window", help="YYYY-MM:YYYY-MM"),
):
    """Fit the configured named index pairs side by side."""
    run = run_context(ctx)
    config = run.config()
    window = MonthInterval.parse(window) if window else config.search.window
    registry = build_registry(config, window)
    report = compare_named_models(
        registry,
        window,
        pairs=config.named_pairs,
        lags=config.search.lags,
        condition_limit=config.search.condition_limit,
        tie_tolerance=config.search.tie_tolerance,
    )
    run.write_json("compare.json", report.model_dump_json(indent=2))
    run.write_frame("compare.csv", report.to_frame())
    run.finish(ctx, window=report.window)
    stdout.print(report.to_text())
