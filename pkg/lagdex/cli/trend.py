from __future__ import annotations

import pandas as pd
import typer

from lagdex.cli._app import app, handle_errors, run_context, stdout
from lagdex.ingest import build_registry
from lagdex.series import diff
from lagdex.trend import detect_breakpoints, mirror_forecast


@app.command()
@handle_errors
def trend(
    ctx: typer.Context,
    a: str = typer.Option(..., "--a", help="Minuend series, e.g. CC."),
    b: str = typer.Option(..., "--b", help="Subtrahend series, e.g. C."),
    max_breaks: int = typer.Option(None, "--max-breaks", min=0),
    min_segment: int = typer.Option(None, "--min-segment", min=2),
    gap_max: int = typer.Option(None, "--gap-max", min=0),
    mirror_pivot: str = typer.Option(
        None, "--mirror-pivot", help="Reflect the last trend from this month."
    ),
    horizon: int = typer.Option(72, "--horizon", min=1, help="Forecast months."),
):
    """Piecewise linear trend of the difference between two indices."""
    run = run_context(ctx)
    config = run.config()
    settings = config.trend
    registry = build_registry(config)
    series = diff(registry.get(a), registry.get(b))
    fit = detect_breakpoints(
        series,
        max_breaks=settings.max_breaks if max_breaks is None else max_breaks,
        min_segment=settings.min_segment if min_segment is None else min_segment,
        gap_max=settings.gap_max if gap_max is None else gap_max,
        min_year=settings.min_year,
    )
    payload = fit.model_dump(mode="json")
    run.write_frame("trend.csv", fit.to_frame(series))
    forecast = None
    if mirror_pivot is not None:
        forecast = mirror_forecast(fit.segments[-1], mirror_pivot, horizon)
        payload["mirror"] = forecast.model_dump(mode="json")
        months = forecast.interval
        frame = pd.DataFrame(
            {
                "month": [str(m) for m in months.months()],
                "forecast": forecast.values_over(months),
            }
        )
        run.write_frame("mirror.csv", frame)
    run.write_data("trend.json", payload)
    run.finish(ctx, window=fit.interval)

    stdout.print(f"{series.id}: {len(fit.breakpoints)} break(s)")
    for n, seg in enumerate(fit.segments):
        note = "" if seg.informative else "  (before the informative period)"
        stdout.print(f"  {n}: {seg.interval}  B = {seg.slope:+.3f}/yr{note}")
    if forecast is not None:
        stdout.print(f"  mirror from {forecast.start}: B = {forecast.slope:+.3f}/yr")
