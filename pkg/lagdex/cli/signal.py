from __future__ import annotations

import pathlib

import pandas as pd
import typer

from lagdex.cli._app import app, handle_errors, run_context, stdout
from lagdex.config import SignalSettings
from lagdex.ingest import build_registry
from lagdex.regress import load_model, predict
from lagdex.signal import (
    deviation_series,
    episode_summary,
    episodes_to_frame,
    find_episodes,
)


@app.command()
@handle_errors
def signal(
    ctx: typer.Context,
    model: pathlib.Path = typer.Option(  # noqa: B008
        ...,
        "--model",
        exists=True,
        dir_okay=False,
        help="Model file written by fit or search.",
    ),
    enter: float = typer.Option(None, "--enter", help="Opening multiple of rms."),
    exit_: float = typer.Option(None, "--exit", help="Closing multiple of rms."),
):
    """Deviations of the price from a fitted model and their episodes."""
    run = run_context(ctx)
    config = run.config()
    settings = SignalSettings(
        enter=config.signal.enter if enter is None else enter,
        exit=config.signal.exit if exit_ is None else exit_,
    )
    fitted_model = load_model(model)
    registry = build_registry(config)
    target = registry.target
    dev = deviation_series(target, fitted_model, registry)
    episodes = find_episodes(dev, settings.enter, settings.exit, fitted_model.rms)
    summary = episode_summary(episodes)

    predicted = predict(fitted_model, registry, dev.interval)
    months = dev.interval
    run.write_frame(
        "deviation.csv",
        pd.DataFrame(
            {
                "month": [str(m) for m in months.months()],
                "observed": target.values_over(months),
                "predicted": predicted.values_over(months),
                "deviation": dev.values,
            }
        ),
    )
    run.write_frame("episodes.csv", episodes_to_frame(episodes))
    run.write_data(
        "episodes.json",
        {
            "rms": fitted_model.rms,
            "enter": settings.enter,
            "exit": settings.exit,
            "episodes": [e.model_dump(mode="json") for e in episodes],
            "summary": [s.model_dump(mode="json") for s in summary],
        },
    )
    run.inputs.append(model)
    run.finish(ctx, window=months)

    stdout.print(fitted_model.equation())
    for s in summary:
        rate = "-" if s.resolution_rate is None else f"{s.resolution_rate:.0%}"
        stdout.print(f"{s.sign:>8}: {s.count} episodes, {rate} returned to the model")
