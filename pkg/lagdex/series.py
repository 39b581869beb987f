"""Calendar-month arithmetic and monthly time series.

Every other module in lagdex works on `MonthlySeries`, a contiguous block of
monthly observations starting at a `MonthStamp`.  Missing observations are
stored as NaN, never by omitting the month.
"""

from __future__ import annotations

import logging
import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import NewType

import numpy as np
import pandas as pd

from .exceptions import EmptyIntersection, EmptySeries, InvalidInterval

logger = logging.getLogger("lagdex.series")

YearFraction = NewType("YearFraction", float)

_MONTH_RE = re.compile(r"^\s*(\d{4})-(\d{1,2})\s*$")
_LAG_LABEL_RE = re.compile(r"^(.*)\(t([+-])(\d+)\)$")


@dataclass(frozen=True, order=True)
class MonthStamp:
    """A calendar month, ordered by (year, month)."""

    year: int
    month: int

    def __post_init__(self):
        if not 1 <= self.month <= 12:
            raise ValueError(f"month must be in 1..12, not {self.month}")

    @classmethod
    def parse(cls, value: str | MonthStamp | pd.Period) -> MonthStamp:
        """Read a month from "YYYY-MM" text, a pandas Period or a MonthStamp."""
        if isinstance(value, MonthStamp):
            return value
        if isinstance(value, pd.Period | pd.Timestamp):
            return cls(int(value.year), int(value.month))
        match = _MONTH_RE.match(str(value))
        if match is None:
            raise ValueError(f"expected a YYYY-MM month, got {value!r}")
        return cls(int(match.group(1)), int(match.group(2)))

    @classmethod
    def from_index(cls, index: int) -> MonthStamp:
        year, month0 = divmod(int(index), 12)
        return cls(year, month0 + 1)

    @property
    def index(self) -> int:
        """Months since January of year zero."""
        return self.year * 12 + self.month - 1

    def shift(self, months: int) -> MonthStamp:
        return MonthStamp.from_index(self.index + int(months))

    def __add__(self, months: int) -> MonthStamp:
        if isinstance(months, bool) or not isinstance(months, int | np.integer):
            return NotImplemented
        return self.shift(months)

    def __sub__(self, other):
        if isinstance(other, MonthStamp):
            return self.index - other.index
        if isinstance(other, int | np.integer) and not isinstance(other, bool):
            return self.shift(-other)
        return NotImplemented

    def __str__(self):
        return f"{self.year:04d}-{self.month:02d}"

    def to_period(self) -> pd.Period:
        return pd.Period(year=self.year, month=self.month, freq="M")


def year_fraction(m: MonthStamp) -> YearFraction:
    """Fractional calendar year at the start of the month.

    January 2000 is exactly 2000.0 and each month adds 1/12.
    """
    return YearFraction(m.year + (m.month - 1) / 12)


@dataclass(frozen=True)
class MonthInterval:
    """An inclusive range of months, written "YYYY-MM:YYYY-MM"."""

    start: MonthStamp
    end: MonthStamp

    def __post_init__(self):
        if self.end < self.start:
            raise InvalidInterval(f"interval ends before it starts: {self}")

    @classmethod
    def parse(cls, value: str | MonthInterval | Sequence) -> MonthInterval:
        if isinstance(value, MonthInterval):
            return value
        if isinstance(value, str):
            parts = value.split(":")
            if len(parts) != 2:
                raise InvalidInterval(f"expected YYYY-MM:YYYY-MM, got {value!r}")
        else:
            parts = list(value)
            if len(parts) != 2:
                raise InvalidInterval(f"expected two months, got {value!r}")
        try:
            start, end = (MonthStamp.parse(p) for p in parts)
        except ValueError as err:
            raise InvalidInterval(str(err)) from err
        return cls(start, end)

    def __str__(self):
        return f"{self.start}:{self.end}"

    def __len__(self):
        return self.end - self.start + 1

    def __contains__(self, m: MonthStamp) -> bool:
        return self.start <= m <= self.end

    def months(self) -> list[MonthStamp]:
        return [self.start.shift(i) for i in range(len(self))]

    def intersection(self, other: MonthInterval) -> MonthInterval | None:
        start = max(self.start, other.start)
        end = min(self.end, other.end)
        if end < start:
            return None
        return MonthInterval(start, end)

    def truncate(self, end: MonthStamp) -> MonthInterval:
        """The same interval ending no later than `end`."""
        return MonthInterval(self.start, min(self.end, end))


def lag_label(name: str, lag: int) -> str:
    """Annotate a series name with a lag, e.g. ``PPI(t-1)``."""
    if lag == 0:
        return name
    if lag > 0:
        return f"{name}(t-{lag})"
    return f"{name}(t+{-lag})"


def _split_lag_label(label: str) -> tuple[str, int]:
    match = _LAG_LABEL_RE.match(label)
    if match is None:
        return label, 0
    lag = int(match.group(3))
    return match.group(1), lag if match.group(2) == "-" else -lag


class MonthlySeries:
    """Immutable block of monthly observations.

    Parameters
    ----------
    id : str
        Series identifier.
    start : MonthStamp or str
        Month of the first observation.
    values : array-like of float
        One value per consecutive month; NaN marks a missing observation.
    """

    __slots__ = ("id", "start", "values")

    def __init__(
        self, id: str, start: MonthStamp | str, values: Iterable[float] | np.ndarray
    ):
        arr = np.array(values, dtype=np.float64, copy=True).reshape(-1)
        if arr.size == 0:
            raise EmptySeries(f"series {id!r} has no observations")
        if np.isinf(arr).any():
            raise ValueError(f"series {id!r} contains infinite values")
        arr.setflags(write=False)
        object.__setattr__(self, "id", str(id))
        object.__setattr__(self, "start", MonthStamp.parse(start))
        object.__setattr__(self, "values", arr)

    def __setattr__(self, key, value):
        raise AttributeError("MonthlySeries is immutable")

    def __getstate__(self):
        return (self.id, self.start, self.values)

    def __setstate__(self, state):
        id, start, values = state
        object.__setattr__(self, "id", id)
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size

    def __repr__(self):
        return (
            f"MonthlySeries({self.id!r}, {self.start}..{self.end}, "
            f"{self.finite_count()} observed)"
        )

    def __eq__(self, other):
        if not isinstance(other, MonthlySeries):
            return NotImplemented
        return (
            self.id == other.id
            and self.start == other.start
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    __hash__ = None

    @property
    def end(self) -> MonthStamp:
        return self.start.shift(self.values.size - 1)

    @property
    def interval(self) -> MonthInterval:
        return MonthInterval(self.start, self.end)

    def months(self) -> list[MonthStamp]:
        return self.interval.months()

    def finite_count(self) -> int:
        return int(np.isfinite(self.values).sum())

    def value_at(self, m: MonthStamp | str) -> float:
        """Value at a month, NaN when missing or out of range."""
        i = MonthStamp.parse(m) - self.start
        if 0 <= i < self.values.size:
            return float(self.values[i])
        return float("nan")

    def values_over(self, interval: MonthInterval) -> np.ndarray:
        """Values for every month of `interval`, NaN outside this series."""
        out = np.full(len(interval), np.nan)
        offset = interval.start - self.start
        lo = max(0, -offset)
        hi = min(len(interval), self.values.size - offset)
        if hi > lo:
            out[lo:hi] = self.values[lo + offset : hi + offset]
        return out

    def restrict(self, interval: MonthInterval) -> MonthlySeries:
        overlap = self.interval.intersection(interval)
        if overlap is None:
            raise EmptyIntersection(f"series {self.id!r} does not cover {interval}")
        return MonthlySeries(self.id, overlap.start, self.values_over(overlap))

    def renamed(self, id: str) -> MonthlySeries:
        return MonthlySeries(id, self.start, self.values)

    def scale(self, k: float) -> MonthlySeries:
        return MonthlySeries(self.id, self.start, self.values * k)

    def add(self, other: MonthlySeries | float) -> MonthlySeries:
        """Pointwise sum on the common month range."""
        if not isinstance(other, MonthlySeries):
            return MonthlySeries(self.id, self.start, self.values + other)
        overlap = self.interval.intersection(other.interval)
        if overlap is None:
            raise EmptyIntersection(f"{self.id!r} and {other.id!r} do not overlap")
        return MonthlySeries(
            self.id,
            overlap.start,
            self.values_over(overlap) + other.values_over(overlap),
        )

    def to_pandas(self) -> pd.Series:
        index = pd.period_range(start=self.start.to_period(), periods=len(self))
        return pd.Series(np.array(self.values), index=index, name=self.id)

    @classmethod
    def from_pandas(cls, s: pd.Series, id: str | None = None) -> MonthlySeries:
        """Build from a Series indexed by monthly periods or timestamps.

        Months absent from the index become explicit missing values.
        """
        name = id if id is not None else (s.name or "series")
        index = s.index
        if isinstance(index, pd.DatetimeIndex):
            index = index.to_period("M")
        elif not isinstance(index, pd.PeriodIndex):
            index = pd.PeriodIndex(index, freq="M")
        s = pd.Series(np.asarray(s, dtype=float), index=index).sort_index()
        if s.index.has_duplicates:
            raise ValueError("duplicate months in index")
        full = pd.period_range(s.index[0], s.index[-1], freq="M")
        s = s.reindex(full)
        return cls(str(name), MonthStamp.parse(full[0]), s.to_numpy())


def shift(series: MonthlySeries, lag: int) -> MonthlySeries:
    """Lag a series by `lag` months.

    The result at month m holds the input value at month m - lag, so a
    positive lag uses index values from the past.
    """
    lag = int(lag)
    if lag == 0:
        return series
    base, prior = _split_lag_label(series.id)
    return MonthlySeries(
        lag_label(base, prior + lag), series.start + lag, series.values
    )


def lagged_values(series: MonthlySeries, lag: int, interval: MonthInterval):
    """Values of ``shift(series, lag)`` over `interval`, NaN where unavailable."""
    return series.values_over(MonthInterval(interval.start - lag, interval.end - lag))


def common_interval(series_list: Sequence[MonthlySeries]) -> MonthInterval:
    if not series_list:
        raise ValueError("no series given")
    result = series_list[0].interval
    for s in series_list[1:]:
        result = result.intersection(s.interval)
        if result is None:
            break
    if result is None:
        ids = ", ".join(repr(s.id) for s in series_list)
        raise EmptyIntersection(f"no common month among {ids}")
    return result


def align(series_list: Sequence[MonthlySeries]) -> pd.DataFrame:
    """Tabulate series on their common months.

    Returns
    -------
    pandas.DataFrame
        Indexed by monthly period, one column per series, restricted to the
        intersection of the month ranges with any month missing in any input
        dropped.
    """
    interval = common_interval(series_list)
    columns = {}
    for s in series_list:
        name = s.id
        n = 2
        while name in columns:
            name = f"{s.id}#{n}"
            n += 1
        columns[name] = s.values_over(interval)
    index = pd.period_range(start=interval.start.to_period(), periods=len(interval))
    table = pd.DataFrame(columns, index=index).dropna(how="any")
    if table.empty:
        raise EmptyIntersection(
            f"no month in {interval} is observed in every series"
        )
    return table


def diff(a: MonthlySeries, b: MonthlySeries) -> MonthlySeries:
    """Pointwise ``a - b`` on the common month range."""
    interval = common_interval([a, b])
    values = a.values_over(interval) - b.values_over(interval)
    if not np.isfinite(values).any():
        raise EmptyIntersection(f"{a.id!r} and {b.id!r} share no observed month")
    return MonthlySeries(f"{a.id}-{b.id}", interval.start, values)
