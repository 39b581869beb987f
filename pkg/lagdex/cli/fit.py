from __future__ import annotations

import pandas as pd
import typer

from lagdex.cli._app import (
    app,
    handle_errors,
    run_context,
    split_ints,
    split_names,
    stdout,
)
from lagdex.exceptions import ConfigError
from lagdex.ingest import build_registry
from lagdex.regress import (
    LagModel,
    fit_lag_model,
    fit_simple_diff,
    fitted,
    save_model,
)
from lagdex.series import MonthInterval, diff


def residual_frame(model, registry) -> pd.DataFrame:
    window = model.window
    observed = registry.target.values_over(window)
    predicted = fitted(model, registry).values_over(window)
    return pd.DataFrame(
        {
            "month": [str(m) for m in window.months()],
            "observed": observed,
            "fitted": predicted,
            "residual": observed - predicted,
        }
    )


@app.command()
@handle_errors
def fit(
    ctx: typer.Context,
    pair: str = typer.Option(None, "--pair", help="Two indices, e.g. PPI,COAL."),
    lags: str = typer.Option("0,0", "--lags", help="Lag of each index, e.g. 1,1."),
    dcpi: str = typer.Option(
        None, "--dcpi", help="Fit on the difference of two indices, e.g. CC,C."
    ),
    lag: int = typer.Option(0, "--lag", help="Lag of the index difference."),
    window: str = typer.Option(None, "--window", help="YYYY-MM:YYYY-MM"),
):
    """Fit one lag model and print its equation."""
    if (pair is None) == (dcpi is None):
        raise ConfigError("give exactly one of --pair and --dcpi")
    run = run_context(ctx)
    config = run.config()
    window = MonthInterval.parse(window) if window else config.search.window
    registry = build_registry(config, window)
    limit = config.search.condition_limit
    if pair is not None:
        (n1, n2), (l1, l2) = split_names(pair), split_ints(lags)
        model = fit_lag_model(
            registry.target,
            (registry.get(n1), l1),
            (registry.get(n2), l2),
            window,
            limit,
        )
    else:
        minuend, subtrahend = split_names(dcpi)
        difference = diff(registry.get(minuend), registry.get(subtrahend))
        model = fit_simple_diff(
            registry.target,
            difference,
            lag,
            window,
            limit,
            components=(minuend, subtrahend),
        )

    path = run.output_dir() / "model.json"
    run.outputs.append(save_model(model, path))
    run.write_frame("residuals.csv", residual_frame(model, registry))
    run.finish(ctx, window=model.window)

    stdout.print(model.equation())
    stdout.print(f"window {model.window}, {model.n_obs} months")
    if isinstance(model, LagModel):
        row = model.table_row()
        stdout.print(
            "  ".join(
                f"{k}={v:.4f}" if isinstance(v, float) else f"{k}={v}"
                for k, v in row.items()
            )
        )
