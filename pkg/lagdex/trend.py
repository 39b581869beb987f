"""Piecewise linear trends of index differences.

A trend segment is ``value(t) = A + B t`` with t in fractional calendar years,
so A is the (extrapolated) value in year zero and B is the change per year.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np
import pandas as pd
from pydantic import model_validator

from .config.pretty import PrettyModel
from .config.types import IntervalField, MonthField
from .exceptions import InsufficientData
from .regress import (
    DEFAULT_CONDITION_LIMIT,
    SimpleDiffModel,
    fit_simple_diff,
    least_squares,
)
from .series import (
    MonthInterval,
    MonthlySeries,
    MonthStamp,
    common_interval,
    year_fraction,
)

logger = logging.getLogger("lagdex.trend")

MIN_SEGMENT_OBSERVATIONS = 24
DEFAULT_MIN_YEAR = 1982
BREAK_TOLERANCE = 1e-9


class TrendSegment(PrettyModel, frozen=True):
    """A straight-line piece of a trend, A + B t."""

    start: MonthField
    end: MonthField
    intercept: float
    """A, the line's value at t = 0."""

    slope: float
    """B, index units per year."""

    sse: float = 0.0
    n_obs: int = 0
    informative: bool = True
    """False for segments starting before the index differences carry signal."""

    @model_validator(mode="after")
    def _start_before_end(self):
        if not self.start < self.end:
            raise ValueError(f"segment must start before it ends: {self.start}")
        return self

    @property
    def interval(self) -> MonthInterval:
        return MonthInterval(self.start, self.end)

    def value_at(self, month: MonthStamp | str) -> float:
        return self.intercept + self.slope * year_fraction(MonthStamp.parse(month))

    def values_over(self, interval: MonthInterval) -> np.ndarray:
        t = np.array([year_fraction(m) for m in interval.months()])
        return self.intercept + self.slope * t


class TrendFit(PrettyModel):
    series_id: str
    segments: list[TrendSegment]
    breakpoints: list[MonthField]
    """First month after each segment but the last."""

    gaps: list[IntervalField] = []
    """Transition months left out of every segment."""

    total_sse: float

    @model_validator(mode="after")
    def _segments_ordered(self):
        for prev, seg in zip(self.segments, self.segments[1:]):
            if not prev.end < seg.start:
                raise ValueError(f"segments overlap at {seg.start}")
        return self

    @property
    def interval(self) -> MonthInterval:
        return MonthInterval(self.segments[0].start, self.segments[-1].end)

    def segment_ids(self) -> np.ndarray:
        """Segment number for each month of the fit, -1 in transition gaps."""
        interval = self.interval
        ids = np.full(len(interval), -1, dtype=int)
        for n, seg in enumerate(self.segments):
            ids[seg.start - interval.start : seg.end - interval.start + 1] = n
        return ids

    def fitted(self) -> MonthlySeries:
        interval = self.interval
        values = np.full(len(interval), np.nan)
        for seg in self.segments:
            lo = seg.start - interval.start
            values[lo : lo + len(seg.interval)] = seg.values_over(seg.interval)
        return MonthlySeries(f"{self.series_id}-trend", interval.start, values)

    def to_frame(self, series: MonthlySeries) -> pd.DataFrame:
        """Plot-ready table with columns month, value, fitted and segment_id."""
        interval = self.interval
        return pd.DataFrame(
            {
                "month": [str(m) for m in interval.months()],
                "value": series.values_over(interval),
                "fitted": self.fitted().values,
                "segment_id": self.segment_ids(),
            }
        )


def _line_fit(
    series: MonthlySeries, window: MonthInterval, min_obs: int, min_year: int | None
) -> TrendSegment:
    y = series.values_over(window)
    ok = np.isfinite(y)
    n = int(ok.sum())
    if n < min_obs:
        raise InsufficientData(
            f"{n} observations of {series.id} in {window}, need {min_obs}",
            available=n,
            required=min_obs,
        )
    t0 = year_fraction(window.start)
    x = (np.arange(len(window)) / 12.0)[ok]
    X = np.column_stack([x, np.ones(n)])
    solution = least_squares(X, y[ok], ("t", "1"), DEFAULT_CONDITION_LIMIT)
    slope, level = solution.coefficients
    return TrendSegment(
        start=window.start,
        end=window.end,
        intercept=float(level - slope * t0),
        slope=float(slope),
        sse=solution.sse,
        n_obs=n,
        informative=min_year is None or window.start.year >= min_year,
    )


def fit_segment(
    series: MonthlySeries, window: MonthInterval | str | None = None
) -> TrendSegment:
    """
    Least-squares straight line over `window`.

    Raises
    ------
    InsufficientData
        Fewer than 24 observed months in the window.
    """
    window = MonthInterval.parse(window) if window is not None else series.interval
    return _line_fit(series, window, MIN_SEGMENT_OBSERVATIONS, None)


def _prefix_sums(series: MonthlySeries) -> np.ndarray:
    y = np.asarray(series.values, dtype=float)
    ok = np.isfinite(y)
    x = np.arange(y.size) / 12.0
    x = x - x.mean()
    yc = np.where(ok, y - np.nanmean(y), 0.0)
    xc = np.where(ok, x, 0.0)
    moments = np.stack([ok.astype(float), xc, xc * xc, yc, xc * yc, yc * yc])
    return np.concatenate([np.zeros((6, 1)), np.cumsum(moments, axis=1)], axis=1)


def _segment_sse(sums: np.ndarray, start, stop) -> np.ndarray:
    """Residual sum of squares of the line through months start..stop-1."""
    start, stop = np.broadcast_arrays(np.asarray(start), np.asarray(stop))
    n, sx, sxx, sy, sxy, syy = sums[:, stop] - sums[:, start]
    with np.errstate(divide="ignore", invalid="ignore"):
        vxx = sxx - sx * sx / n
        vxy = sxy - sx * sy / n
        vyy = syy - sy * sy / n
        sse = vyy - vxy * vxy / vxx
    return np.where(n >= 2, np.maximum(sse, 0.0), np.inf)


def _suffix_costs(
    sums: np.ndarray, size: int, max_breaks: int, min_segment: int, gap_max: int
) -> np.ndarray:
    """cost[k, i]: least SSE covering months i.. with exactly k breaks."""
    cost = np.full((max_breaks + 1, size + 1), np.inf)
    starts = np.arange(size - min_segment + 1)
    cost[0, starts] = _segment_sse(sums, starts, size)
    for k in range(1, max_breaks + 1):
        for i in range(size - (k + 1) * min_segment + 1):
            stops = np.arange(i + min_segment, size - min_segment + 1)
            head = _segment_sse(sums, i, stops)
            best = np.inf
            for gap in range(gap_max + 1):
                nxt = stops + gap
                valid = nxt <= size - min_segment
                if not valid.any():
                    break
                best = min(best, float(np.min(head[valid] + cost[k - 1, nxt[valid]])))
            cost[k, i] = best
    return cost


def detect_breakpoints(
    series: MonthlySeries,
    max_breaks: int = 2,
    min_segment: int = 36,
    gap_max: int = 0,
    min_year: int | None = DEFAULT_MIN_YEAR,
) -> TrendFit:
    """
    Optimal piecewise linear segmentation with at most `max_breaks` breaks.

    Every placement of up to `max_breaks` breaks with segments of at least
    `min_segment` months is considered, and the one with least total squared
    error wins.  An extra break is only taken when it lowers the error by more
    than a relative 1e-9 of the total sum of squares; among equal placements
    the earliest breakpoints win.  With `gap_max` > 0 up to that many months
    between segments may be left out as a transition interval.

    Raises
    ------
    InsufficientData
        The series is shorter than ``(max_breaks + 1) * min_segment`` months.
    """
    size = len(series)
    required = (max_breaks + 1) * min_segment
    if size < required:
        raise InsufficientData(
            f"{series.id} has {size} months, {max_breaks} breaks with "
            f"{min_segment}-month segments need {required}",
            available=size,
            required=required,
        )
    sums = _prefix_sums(series)
    cost = _suffix_costs(sums, size, max_breaks, min_segment, gap_max)
    ok = series.values[np.isfinite(series.values)]
    tss = float(((ok - ok.mean()) ** 2).sum()) if ok.size else 0.0
    tol = BREAK_TOLERANCE * max(tss, 1.0)

    n_breaks = 0
    for k in range(1, max_breaks + 1):
        if cost[k, 0] < cost[n_breaks, 0] - tol:
            n_breaks = k
    if not np.isfinite(cost[n_breaks, 0]):
        raise InsufficientData(f"too few observed months in {series.id}")

    # walk forward taking the earliest break consistent with the optimum
    pieces, gaps = [], []
    i, target = 0, cost[n_breaks, 0]
    for remaining in range(n_breaks, 0, -1):
        chosen = None
        for stop in range(i + min_segment, size - remaining * min_segment + 1):
            head = float(_segment_sse(sums, i, stop))
            for gap in range(gap_max + 1):
                nxt = stop + gap
                if nxt > size - remaining * min_segment:
                    break
                if head + cost[remaining - 1, nxt] <= target + tol:
                    chosen = (stop, nxt)
                    break
            if chosen is not None:
                break
        stop, nxt = chosen
        pieces.append((i, stop))
        if nxt > stop:
            gaps.append(MonthInterval(series.start + stop, series.start + nxt - 1))
        target = cost[remaining - 1, nxt]
        i = nxt
    pieces.append((i, size))

    segments = [
        _line_fit(
            series,
            MonthInterval(series.start + lo, series.start + hi - 1),
            2,
            min_year,
        )
        for lo, hi in pieces
    ]
    result = TrendFit(
        series_id=series.id,
        segments=segments,
        breakpoints=[series.start + hi for _, hi in pieces[:-1]],
        gaps=gaps,
        total_sse=float(sum(s.sse for s in segments)),
    )
    logger.info(
        "%s: %d break(s) at %s, sse %.6g",
        series.id,
        n_breaks,
        ", ".join(str(b) for b in result.breakpoints) or "-",
        result.total_sse,
    )
    return result


def fit_trend(
    series: MonthlySeries,
    breakpoints: Sequence[MonthStamp | str],
    min_year: int | None = DEFAULT_MIN_YEAR,
) -> TrendFit:
    """Fit a contiguous segmentation with the given breakpoints."""
    cuts = [MonthStamp.parse(b) for b in breakpoints]
    bounds = [series.start, *cuts, series.end + 1]
    segments = []
    for lo, hi in zip(bounds, bounds[1:]):
        segments.append(_line_fit(series, MonthInterval(lo, hi - 1), 2, min_year))
    return TrendFit(
        series_id=series.id,
        segments=segments,
        breakpoints=cuts,
        total_sse=float(sum(s.sse for s in segments)),
    )


def mirror_forecast(
    last_segment: TrendSegment, pivot: MonthStamp | str, horizon: int
) -> TrendSegment:
    """
    Reflect the last trend about `pivot`.

    The forecast runs from `pivot` for `horizon` months, with the negated
    slope and the value the last segment reaches at the pivot.
    """
    pivot = MonthStamp.parse(pivot)
    if pivot < last_segment.end:
        raise ValueError(f"pivot {pivot} precedes the segment end {last_segment.end}")
    if horizon < 1:
        raise ValueError("horizon must be at least one month")
    t = year_fraction(pivot)
    level = last_segment.value_at(pivot)
    return TrendSegment(
        start=pivot,
        end=pivot + int(horizon),
        slope=-last_segment.slope,
        intercept=level + last_segment.slope * t,
    )


def segmented_calibration(
    target: MonthlySeries,
    dcpi: MonthlySeries,
    breakpoints: Sequence[MonthStamp | str],
    lag: int = 0,
    window: MonthInterval | str | None = None,
    condition_limit: float = DEFAULT_CONDITION_LIMIT,
) -> list[SimpleDiffModel]:
    """Fit the two-parameter index-difference model separately per trend segment."""
    if window is None:
        window = common_interval([target, dcpi])
    window = MonthInterval.parse(window)
    cuts = [MonthStamp.parse(b) for b in breakpoints]
    bounds = [window.start, *cuts, window.end + 1]
    models = []
    for lo, hi in zip(bounds, bounds[1:]):
        piece = MonthInterval(lo, hi - 1)
        logger.debug("calibrating %s on %s", target.id, piece)
        models.append(fit_simple_diff(target, dcpi, lag, piece, condition_limit))
    return models
