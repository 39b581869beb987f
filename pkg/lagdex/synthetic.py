"""Seeded synthetic indices and prices for tests and offline demonstrations."""

from __future__ import annotations

import logging
import pathlib
from collections.abc import Sequence

import numpy as np

from .config import Config
from .ingest import SeriesRegistry, write_csv
from .regress import trend_column
from .series import MonthInterval, MonthlySeries, MonthStamp, lagged_values

logger = logging.getLogger("lagdex.synthetic")

CPI_NAMES = ("C", "F", "H", "FU", "HHE", "CE", "CC", "E", "MF")
PPI_NAMES = ("GAS", "COAL", "EL", "OIL", "PPI")
CANDIDATE_NAMES = CPI_NAMES + PPI_NAMES

# the March 2012 best fit for ConocoPhillips
COP_TERMS = (("PPI", 1, 1.2687), ("COAL", 1, -0.615))
COP_TREND = 4.023
COP_INTERCEPT = -105.35
DEFAULT_WINDOW = "2002-04:2012-03"
LAG_MARGIN = 13


def random_walks(
    names: Sequence[str],
    interval: MonthInterval | str,
    seed: int | None = 0,
    step: float = 1.0,
    level: float = 100.0,
) -> dict[str, MonthlySeries]:
    """Independent Gaussian random walks starting near `level`."""
    interval = MonthInterval.parse(interval)
    rng = np.random.default_rng(seed)
    walks = {}
    for name in names:
        start = level + rng.normal(0.0, 10.0)
        steps = rng.normal(0.0, step, len(interval))
        walks[name] = MonthlySeries(name, interval.start, start + np.cumsum(steps))
    return walks


def synthetic_target(
    entries: dict[str, MonthlySeries],
    window: MonthInterval | str,
    terms: Sequence[tuple[str, int, float]] = COP_TERMS,
    trend: float = COP_TREND,
    intercept: float = COP_INTERCEPT,
    noise: float = 0.0,
    seed: int | None = None,
    name: str = "COP",
) -> MonthlySeries:
    """A price built from lagged indices, a linear trend and optional noise."""
    window = MonthInterval.parse(window)
    y = trend * trend_column(window) + intercept
    for series_name, lag, coefficient in terms:
        y = y + coefficient * lagged_values(entries[series_name], lag, window)
    if noise:
        y = y + np.random.default_rng(seed).normal(0.0, noise, len(window))
    return MonthlySeries(name, window.start, y)


def synthetic_registry(
    seed: int | None = 0,
    window: MonthInterval | str = DEFAULT_WINDOW,
    names: Sequence[str] = CANDIDATE_NAMES,
    terms: Sequence[tuple[str, int, float]] = COP_TERMS,
    trend: float = COP_TREND,
    intercept: float = COP_INTERCEPT,
    noise: float = 0.0,
    target_name: str = "COP",
) -> SeriesRegistry:
    """
    Random-walk candidates and a target generated from `terms`.

    The candidates start `LAG_MARGIN` months before `window` so that every
    lag on the default grid is available throughout the window.
    """
    window = MonthInterval.parse(window)
    span = MonthInterval(window.start - LAG_MARGIN, window.end)
    entries = random_walks(names, span, seed)
    noise_seed = None if seed is None else seed + 1
    target = synthetic_target(
        entries, window, terms, trend, intercept, noise, noise_seed, target_name
    )
    families = {n: ("PPI" if n in PPI_NAMES else "CPI") for n in names}
    return SeriesRegistry(entries, target, families)


def piecewise_line(
    interval: MonthInterval | str,
    joins: Sequence[MonthStamp | str],
    slopes: Sequence[float],
    start_value: float = 0.0,
    noise: float = 0.0,
    seed: int | None = None,
    id: str = "dCPI",
) -> MonthlySeries:
    """A continuous broken line with per-year `slopes` changing at `joins`."""
    interval = MonthInterval.parse(interval)
    joins = [MonthStamp.parse(j) for j in joins]
    if len(slopes) != len(joins) + 1:
        raise ValueError("need one more slope than joins")
    steps = np.empty(len(interval))
    bounds = [interval.start, *joins, interval.end + 1]
    for slope, lo, hi in zip(slopes, bounds, bounds[1:]):
        steps[lo - interval.start : hi - interval.start] = slope / 12.0
    values = start_value + np.concatenate([[0.0], np.cumsum(steps[:-1])])
    if noise:
        values = values + np.random.default_rng(seed).normal(0.0, noise, values.size)
    return MonthlySeries(id, interval.start, values)


def write_registry(
    registry: SeriesRegistry,
    directory: str | pathlib.Path,
    window: MonthInterval | None = None,
) -> Config:
    """
    Write every series of `registry` to CSV and a config that reads them back.

    The config is saved as ``lagdex.yaml`` in `directory` and returned.
    """
    directory = pathlib.Path(directory)
    data_dir = directory / "data"
    candidates = {}
    for name in registry:
        write_csv(registry.get(name), data_dir / f"{name}.csv")
        candidates[name] = {
            "path": f"data/{name}.csv",
            "family": registry.family(name),
        }
    target = registry.target
    write_csv(target, data_dir / f"{target.id}.csv")
    config = Config.model_validate(
        {
            "scenario": "synthetic",
            "target": {
                "name": target.id,
                "path": f"data/{target.id}.csv",
                "family": "price",
            },
            "candidates": candidates,
            "search": {"window": str(window or target.interval)},
        }
    )
    config.to_yaml(directory / "lagdex.yaml")
    logger.info("wrote %d series to %s", len(registry) + 1, data_dir)
    return config
