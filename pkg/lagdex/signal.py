"""Deviations of observed prices from a fitted model.

An episode is a run of months where the deviation is large compared with
the model's rms residual.  Episodes open at ``enter * rms`` and close at
``exit * rms``; the gap between the two thresholds keeps a deviation that
hovers near one level from opening and closing every month.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from typing import Literal

import numpy as np
import pandas as pd
from pydantic import model_validator

from .config.pretty import PrettyModel
from .config.types import MonthField
from .ingest import SeriesRegistry
from .regress import LagModel, SimpleDiffModel, predict
from .series import MonthInterval, MonthlySeries, common_interval

logger = logging.getLogger("lagdex.signal")


class DeviationEpisode(PrettyModel, frozen=True):
    start: MonthField
    end: MonthField
    """Last month outside the exit band."""

    sign: Literal[1, -1]
    """+1 when the price is above the model, -1 below."""

    peak_deviation: float
    """Largest absolute deviation in the episode, in price units."""

    resolved: bool
    """The deviation came back inside the exit band before the data ended."""

    @model_validator(mode="after")
    def _ordered(self):
        if self.end < self.start:
            raise ValueError(f"episode ends before it starts: {self.start}")
        return self

    @property
    def duration(self) -> int:
        return self.end - self.start + 1


def deviation_series(
    target: MonthlySeries,
    model: LagModel | SimpleDiffModel,
    registry: SeriesRegistry,
    months: MonthInterval | str | None = None,
) -> MonthlySeries:
    """Observed minus predicted price, month by month."""
    if months is None:
        months = target.interval
    months = MonthInterval.parse(months)
    predicted = predict(model, registry, months)
    interval = common_interval([target, predicted])
    values = target.values_over(interval) - predicted.values_over(interval)
    return MonthlySeries(f"{target.id}-deviation", interval.start, values)


def find_episodes(
    dev: MonthlySeries, enter: float, exit: float, rms: float
) -> list[DeviationEpisode]:
    """
    Large-deviation episodes with hysteresis.

    An episode opens in the first month with ``|dev| >= enter * rms`` and
    closes at the first later month with ``|dev| <= exit * rms`` or with
    the deviation changing sign; that month is not part of the episode.
    Missing months neither open nor close an episode.  An episode still
    open when the data ends is unresolved.
    """
    if not enter > exit >= 0:
        raise ValueError(f"need enter > exit >= 0, got enter={enter}, exit={exit}")
    high, low = enter * rms, exit * rms
    episodes = []
    current = None  # (start index, sign, peak, last index)
    for i, value in enumerate(dev.values):
        if not np.isfinite(value):
            continue
        if current is not None:
            start, sign, peak, _ = current
            if abs(value) <= low or np.sign(value) != sign:
                episodes.append(_episode(dev, current, resolved=True))
                current = None
            else:
                current = (start, sign, max(peak, abs(value)), i)
                continue
        if abs(value) >= high and value != 0:
            current = (i, int(np.sign(value)), abs(value), i)
    if current is not None:
        episodes.append(_episode(dev, current, resolved=False))
    logger.debug("%d deviation episodes in %s", len(episodes), dev.id)
    return episodes


def _episode(dev: MonthlySeries, state, resolved: bool) -> DeviationEpisode:
    start, sign, peak, last = state
    return DeviationEpisode(
        start=dev.start + start,
        end=dev.start + last,
        sign=sign,
        peak_deviation=float(peak),
        resolved=resolved,
    )


class EpisodeSummary(PrettyModel):
    sign: Literal["all", "positive", "negative"]
    count: int
    resolved: int
    resolution_rate: float | None
    mean_duration: float | None
    """Average length in months."""


def episode_summary(episodes: Sequence[DeviationEpisode]) -> list[EpisodeSummary]:
    """Counts and historical resolution rates, overall and by sign."""
    groups = {
        "all": list(episodes),
        "positive": [e for e in episodes if e.sign > 0],
        "negative": [e for e in episodes if e.sign < 0],
    }
    out = []
    for label, group in groups.items():
        n = len(group)
        solved = sum(e.resolved for e in group)
        out.append(
            EpisodeSummary(
                sign=label,
                count=n,
                resolved=solved,
                resolution_rate=solved / n if n else None,
                mean_duration=float(np.mean([e.duration for e in group]))
                if n
                else None,
            )
        )
    return out


def episodes_to_frame(episodes: Sequence[DeviationEpisode]) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "start": [str(e.start) for e in episodes],
            "end": [str(e.end) for e in episodes],
            "sign": [e.sign for e in episodes],
            "peak": [e.peak_deviation for e in episodes],
            "resolved": [e.resolved for e in episodes],
        },
        columns=["start", "end", "sign", "peak", "resolved"],
    )
