from __future__ import annotations

import pathlib

import typer

from lagdex.cli._app import app, handle_errors, run_context, stdout
from lagdex.config import RemoteSettings
from lagdex.ingest import fetch_remote, write_csv
from lagdex.series import MonthInterval


@app.command()
@handle_errors
def fetch(
    ctx: typer.Context,
    series_id: str = typer.Option(..., "--series-id", help="e.g. CUUR0000SA0"),
    window: str = typer.Option(..., "--window", help="YYYY-MM:YYYY-MM"),
    name: str = typer.Option(None, "--name", help="Output file stem."),
):
    """Download one series from the remote endpoint to CSV."""
    run = run_context(ctx)
    remote = run.config().remote if run.config_files else RemoteSettings()
    series = fetch_remote(
        series_id,
        MonthInterval.parse(window),
        endpoint=remote.endpoint,
        api_key=remote.resolved_api_key(),
        timeout=remote.timeout,
        years_per_request=remote.years_per_request,
    )
    path = run.output_dir() / f"{name or series_id}.csv"
    run.outputs.append(write_csv(series, path, series_id))
    run.finish(ctx, window=series.interval)
    stdout.print(
        f"{series_id}: {series.finite_count()} months "
        f"{series.interval} -> {pathlib.Path(path).as_posix()}"
    )
