from __future__ import annotations

import typer

from lagdex.cli._app import app, handle_errors, run_context, stdout
from lagdex.ingest import build_registry
from lagdex.search import SearchSpec, default_end_months, stability_scan
from lagdex.series import MonthInterval


@app.command()
@handle_errors
def ledger(
    ctx: typer.Context,
    depth: int = typer.Option(None, "--depth", min=1),
    end_months: str = typer.Option(
        None,
        "--end-months",
        help="YYYY-MM:YYYY-MM range of end months; the last DEPTH months "
        "of the search window by default.",
    ),
    window: str = typer.Option(None, "--window", help="YYYY-MM:YYYY-MM"),
    progress: bool = typer.Option(True, "--progress/--no-progress"),
):
    """Best model at each of a run of end months, with a stability flag."""
    run = run_context(ctx)
    config = run.config()
    depth = depth or config.search.depth
    window = MonthInterval.parse(window) if window else config.search.window
    registry = build_registry(config, window)
    spec = SearchSpec.from_config(config, window)
    if end_months:
        months = MonthInterval.parse(end_months).months()
    else:
        months = default_end_months(spec, registry, depth)
    result = stability_scan(
        spec, registry, months, depth, workers=run.n_workers(), progress=progress
    )

    text = result.to_text()
    run.write_json("ledger.json", result.model_dump_json(indent=2))
    run.write_frame("ledger.csv", result.to_frame())
    run.write_text("ledger.txt", text)
    run.finish(ctx, window=spec.resolved_window(registry))

    stdout.print(text)
    stdout.print(f"stable: {'yes' if result.stable else 'no'} (depth {depth})")
