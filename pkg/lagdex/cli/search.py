from __future__ import annotations

import typer

from lagdex.cli._app import app, handle_errors, run_context, stdout
from lagdex.ingest import build_registry
from lagdex.regress import save_model
from lagdex.search import SearchSpec
from lagdex.search import search as run_search
from lagdex.series import MonthInterval


@app.command()
@handle_errors
def search(
    ctx: typer.Context,
    window: str = typer.Option(None, "--window", help="YYYY-MM:YYYY-MM"),
    top: int = typer.Option(10, "--top", min=0, help="Ranking rows to print."),
):
    """Search all candidate pairs and lags for the least rms model."""
    run = run_context(ctx)
    config = run.config()
    window = MonthInterval.parse(window) if window else config.search.window
    registry = build_registry(config, window)
    spec = SearchSpec.from_config(config, window)
    result = run_search(spec, registry, workers=run.n_workers())

    run.write_json("search.json", result.model_dump_json(indent=2))
    run.write_frame("ranking.csv", result.to_frame())
    run.write_frame("skipped.csv", result.skipped_frame())
    run.outputs.append(save_model(result.best, run.output_dir() / "best.json"))
    run.finish(ctx, window=result.best.window)

    stdout.print(result.best.equation())
    stdout.print(
        f"{result.evaluated_count} of {result.grid_size} combinations fitted, "
        f"{len(result.skipped)} skipped"
    )
    if top:
        stdout.print(result.to_frame().head(top).to_string(index=False))
