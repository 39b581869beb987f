"""Load price and index series and collect them into a registry.

Local files use a fixed three-column CSV layout::

    series_id,month,value
    CUUR0000SA0,2000-01,168.8
    CUUR0000SA0,2000-02,169.8

The header row is optional, rows may come in any order, and an empty value
(or one of ``NA``, ``NaN``, ``-``, ``.``) marks a missing observation.
"""

from __future__ import annotations

import logging
import math
import pathlib
from collections.abc import Iterator, Mapping
from types import MappingProxyType
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd
import requests

from .exceptions import (
    ConfigError,
    DuplicateMonth,
    DuplicateName,
    EmptySeries,
    HttpStatusError,
    InsufficientOverlap,
    LagdexError,
    NetworkError,
    ParseError,
    RateLimited,
    SchemaError,
    SourceLoadError,
    UnknownSeries,
)
from .series import MonthInterval, MonthlySeries, MonthStamp

if TYPE_CHECKING:
    from .config import Config, SeriesSource

logger = logging.getLogger("lagdex.ingest")

MISSING_MARKERS = frozenset({"", "NA", "NaN", "nan", "-", "."})
CSV_COLUMNS = ["series_id", "month", "value"]

N_PARAMETERS = 4
"""Free coefficients of the two-index lag model (two weights, trend, intercept)."""

MIN_EXTRA_OBSERVATIONS = 12


def min_overlap(n_parameters: int = N_PARAMETERS) -> int:
    """Fewest months of overlap accepted for a model with `n_parameters`."""
    return n_parameters + MIN_EXTRA_OBSERVATIONS


def _parse_values(text: pd.Series, lines: pd.Series, path) -> np.ndarray:
    stripped = text.str.strip()
    missing = stripped.isin(MISSING_MARKERS)
    numbers = pd.to_numeric(stripped.where(~missing), errors="coerce")
    bad = (numbers.isna() & ~missing) | np.isinf(numbers.fillna(0.0))
    if bad.any():
        first = bad.idxmax()
        raise ParseError(
            f"invalid value {text[first]!r}", line=int(lines[first]), path=path
        )
    return numbers.to_numpy(dtype=float)


def _is_header(row: pd.Series, month_ok: bool) -> bool:
    """Line 1 is a header when it names the columns or holds no data at all."""
    cells = [str(row[c]).strip().lower() for c in CSV_COLUMNS]
    if cells == CSV_COLUMNS:
        return True
    if month_ok:
        return False
    value = str(row["value"]).strip()
    if value in MISSING_MARKERS:
        return False
    return bool(np.isnan(pd.to_numeric(value, errors="coerce")))


def load_csv(path: str | pathlib.Path, series_id: str | None = None) -> MonthlySeries:
    """
    Read one monthly series from a ``series_id,YYYY-MM,value`` CSV file.

    Parameters
    ----------
    path : path-like
    series_id : str, optional
        Select the rows of this series.  Required when the file holds more
        than one series.

    Returns
    -------
    MonthlySeries
        Chronologically ordered and contiguous, with explicit missing values
        for months absent inside the observed range.

    Raises
    ------
    ParseError
        A malformed row; the message carries the line number.
    DuplicateMonth
        Two rows give different values for the same month.
    EmptySeries
        The file (or the selected series) has no rows.
    """
    path = pathlib.Path(path)
    try:
        raw = pd.read_csv(
            path,
            header=None,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError as err:
        raise EmptySeries(f"{path} is empty") from err
    except pd.errors.ParserError as err:
        raise ParseError(str(err).strip(), path=path) from err
    if raw.shape[1] != 3:
        raise ParseError(f"expected 3 columns, found {raw.shape[1]}", path=path)
    raw = raw.fillna("")
    raw.columns = CSV_COLUMNS
    raw["line"] = np.arange(1, len(raw) + 1)
    raw = raw[(raw[CSV_COLUMNS] != "").any(axis=1)]
    if raw.empty:
        raise EmptySeries(f"{path} has no rows")

    months = raw["month"].str.strip()
    parsed = months.str.extract(r"^(\d{4})-(\d{2})$")
    valid = parsed.notna().all(axis=1)
    if raw["line"].iloc[0] == 1 and _is_header(raw.iloc[0], valid.iloc[0]):
        raw, parsed, valid = raw.iloc[1:], parsed.iloc[1:], valid.iloc[1:]
        if raw.empty:
            raise EmptySeries(f"{path} has a header but no rows")
    month_num = pd.to_numeric(parsed[1], errors="coerce")
    valid &= month_num.between(1, 12)
    if not valid.all():
        first = (~valid).idxmax()
        raise ParseError(
            f"invalid month {raw.at[first, 'month']!r}",
            line=int(raw.at[first, "line"]),
            path=path,
        )

    ids = raw["series_id"].str.strip()
    if series_id is not None:
        keep = ids == series_id
        if not keep.any():
            raise EmptySeries(f"{path} has no rows for series {series_id!r}")
        raw, parsed, ids = raw[keep], parsed[keep], ids[keep]
    elif ids.nunique() > 1:
        found = ", ".join(sorted(ids.unique()))
        raise ParseError(
            f"file holds several series ({found}); select one", path=path
        )

    values = _parse_values(raw["value"], raw["line"], path)
    frame = pd.DataFrame(
        {
            "period": pd.PeriodIndex(parsed[0] + "-" + parsed[1], freq="M"),
            "value": values,
            "line": raw["line"].to_numpy(),
        }
    )
    frame = _drop_duplicate_months(frame)
    if not np.isfinite(frame["value"]).any():
        raise EmptySeries(f"{path} has no observed values")
    name = series_id if series_id is not None else ids.iloc[0]
    series = frame.set_index("period")["value"]
    logger.debug("loaded %s from %s (%d rows)", name, path, len(frame))
    return MonthlySeries.from_pandas(series, id=name)


def _drop_duplicate_months(frame: pd.DataFrame) -> pd.DataFrame:
    dup = frame["period"].duplicated(keep=False)
    if not dup.any():
        return frame
    for period, group in frame[dup].groupby("period", sort=True):
        v = group["value"].to_numpy()
        same = np.all(v == v[0]) or np.all(np.isnan(v))
        if not same:
            raise DuplicateMonth(
                MonthStamp.parse(period),
                (float(v[0]), float(v[1])),
                line=int(group["line"].iloc[1]),
            )
    return frame.drop_duplicates(subset="period", keep="first")


def write_csv(
    series: MonthlySeries,
    path: str | pathlib.Path,
    series_id: str | None = None,
    float_format: str | None = None,
) -> pathlib.Path:
    """
    Write a series in the layout read by `load_csv`.

    Missing observations are written as empty values, so the file reloads
    to an identical series.
    """
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        {
            "series_id": series_id or series.id,
            "month": [str(m) for m in series.months()],
            "value": series.values,
        }
    )
    frame.to_csv(path, index=False, lineterminator="\n", float_format=float_format)
    return path


def _year_blocks(interval: MonthInterval, size: int) -> Iterator[tuple[int, int]]:
    year = interval.start.year
    while year <= interval.end.year:
        last = min(year + size - 1, interval.end.year)
        yield year, last
        year = last + 1


def _extract_records(body, series_id: str) -> list[dict]:
    """Pull (year, period, value) records out of a response body."""
    if isinstance(body, list):
        return body
    if not isinstance(body, dict):
        raise SchemaError(f"unexpected response of type {type(body).__name__}")
    status = body.get("status")
    if status is not None and status != "REQUEST_SUCCEEDED":
        messages = " ".join(str(m) for m in body.get("message", []))
        if "threshold" in messages.lower():
            raise RateLimited(None)
        raise SchemaError(f"request not processed ({status}): {messages}")
    try:
        series_list = body["Results"]["series"]
    except (KeyError, TypeError) as err:
        raise SchemaError("response has no Results.series") from err
    for entry in series_list:
        if entry.get("seriesID", series_id) == series_id:
            data = entry.get("data")
            if not isinstance(data, list):
                raise SchemaError(f"series {series_id!r} has no data list")
            return data
    raise SchemaError(f"series {series_id!r} missing from response")


def _parse_record(record) -> tuple[MonthStamp, float] | None:
    try:
        year = int(record["year"])
        period = str(record["period"])
        raw = str(record["value"]).strip()
    except (KeyError, TypeError, ValueError) as err:
        raise SchemaError(f"malformed record {record!r}") from err
    if period == "M13":
        # annual average
        return None
    if len(period) != 3 or period[0] != "M" or not period[1:].isdigit():
        raise SchemaError(f"unexpected period {period!r}")
    month = int(period[1:])
    if not 1 <= month <= 12:
        raise SchemaError(f"unexpected period {period!r}")
    if raw in MISSING_MARKERS:
        value = math.nan
    else:
        try:
            value = float(raw)
        except ValueError as err:
            raise SchemaError(f"non-numeric value {raw!r}") from err
    return MonthStamp(year, month), value


def fetch_remote(
    series_id: str,
    interval: MonthInterval | str,
    endpoint: str,
    api_key: str | None = None,
    timeout: float = 30.0,
    years_per_request: int = 20,
) -> MonthlySeries:
    """
    Download one monthly series from a BLS-style JSON endpoint.

    Parameters
    ----------
    series_id : str
    interval : MonthInterval or str
        Months to request; records outside it are dropped.
    endpoint : str
        URL accepting a JSON POST of ``seriesid``, ``startyear`` and
        ``endyear``.
    api_key : str, optional
        Sent as ``registrationkey``.
    timeout : float
    years_per_request : int
        Longer ranges are split into several requests.

    Returns
    -------
    MonthlySeries
        Shaped exactly like the output of `load_csv`.  Annual-average
        records (period ``M13``) are discarded.
    """
    if not series_id:
        raise ConfigError("series_id must not be empty")
    interval = MonthInterval.parse(interval)
    observed: dict[MonthStamp, float] = {}
    for first, last in _year_blocks(interval, years_per_request):
        payload = {
            "seriesid": [series_id],
            "startyear": str(first),
            "endyear": str(last),
        }
        if api_key:
            payload["registrationkey"] = api_key
        logger.info("requesting %s for %d-%d from %s", series_id, first, last, endpoint)
        try:
            response = requests.post(endpoint, json=payload, timeout=timeout)
        except requests.RequestException as err:
            raise NetworkError(f"cannot reach {endpoint}: {err}") from err
        if response.status_code == 429:
            retry_after = response.headers.get("Retry-After")
            try:
                retry_after = float(retry_after) if retry_after is not None else None
            except ValueError:
                retry_after = None
            raise RateLimited(retry_after)
        if not response.ok:
            raise HttpStatusError(response.status_code, response.reason or "")
        try:
            body = response.json()
        except ValueError as err:
            raise SchemaError("response is not JSON") from err
        for record in _extract_records(body, series_id):
            parsed = _parse_record(record)
            if parsed is None:
                continue
            month, value = parsed
            if month in interval:
                observed[month] = value
    if not observed:
        raise EmptySeries(f"no monthly records for {series_id!r} in {interval}")
    s = pd.Series(
        list(observed.values()), index=[m.to_period() for m in observed.keys()]
    )
    return MonthlySeries.from_pandas(s, id=series_id)


class SeriesRegistry:
    """
    Candidate defining indices and the target price series.

    Parameters
    ----------
    entries : Mapping[str, MonthlySeries]
        Candidate indices keyed by symbolic name (e.g. "CC", "PPI").
    target : MonthlySeries
        The stock price; its `id` is the target name.
    families : Mapping[str, str], optional
        "CPI" or "PPI" for each entry.
    """

    def __init__(
        self,
        entries: Mapping[str, MonthlySeries],
        target: MonthlySeries,
        families: Mapping[str, str] | None = None,
    ):
        if target.id in entries:
            raise DuplicateName(f"target {target.id!r} is also a candidate")
        self._entries = MappingProxyType(dict(entries))
        self.target = target
        families = dict(families or {})
        self._families = MappingProxyType(
            {name: families.get(name, "CPI") for name in self._entries}
        )

    @property
    def entries(self) -> Mapping[str, MonthlySeries]:
        return self._entries

    @property
    def names(self) -> list[str]:
        return list(self._entries)

    def family(self, name: str) -> str:
        if name not in self._families:
            raise UnknownSeries(name, self._entries)
        return self._families[name]

    def get(self, name: str) -> MonthlySeries:
        """A candidate series, or the target when `name` is the target name."""
        if name in self._entries:
            return self._entries[name]
        if name == self.target.id:
            return self.target
        raise UnknownSeries(name, [*self._entries, self.target.id])

    def __getitem__(self, name: str) -> MonthlySeries:
        return self.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self._entries or name == self.target.id

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def __reduce__(self):
        return (
            SeriesRegistry,
            (dict(self._entries), self.target, dict(self._families)),
        )

    def __repr__(self):
        return (
            f"<SeriesRegistry target={self.target.id!r} "
            f"candidates={', '.join(self._entries)}>"
        )

    def with_entries(self, extra: Mapping[str, MonthlySeries], family="CPI"):
        entries = dict(self._entries)
        families = dict(self._families)
        for name, series in extra.items():
            if name in entries or name == self.target.id:
                raise DuplicateName(f"series {name!r} already registered")
            entries[name] = series
            families[name] = family
        return SeriesRegistry(entries, self.target, families)

    def overlap(self, name: str, window: MonthInterval | None = None) -> int:
        """Months inside `window` where both the target and `name` are observed."""
        window = window or self.target.interval
        a = self.get(name).values_over(window)
        b = self.target.values_over(window)
        return int((np.isfinite(a) & np.isfinite(b)).sum())


def _remote_interval(config: Config) -> MonthInterval:
    window = config.search.window
    if window is None:
        raise ConfigError("remote sources require search.window to be set")
    lead = max(config.search.lag_max, 0)
    lag = max(-config.search.lag_min, 0)
    return MonthInterval(window.start - lead, window.end + lag)


def load_source(source: SeriesSource, config: Config) -> MonthlySeries:
    """Load one configured source and label it with its symbolic name."""
    if source.path is not None:
        series = load_csv(config.resolve_path(source.path), source.series_id)
    else:
        series = fetch_remote(
            source.series_id,
            _remote_interval(config),
            endpoint=config.remote.endpoint,
            api_key=config.remote.resolved_api_key(),
            timeout=config.remote.timeout,
            years_per_request=config.remote.years_per_request,
        )
    return series.renamed(source.name)


def build_registry(
    config: Config, window: MonthInterval | str | None = None
) -> SeriesRegistry:
    """
    Load every configured source into a `SeriesRegistry`.

    All sources are attempted before failing, so one `SourceLoadError`
    reports every broken source.  Candidates whose overlap with the target
    inside the search window is shorter than `min_overlap()` months are
    rejected with `InsufficientOverlap`.
    """
    sources = {config.target.name: config.target, **config.candidates}
    loaded: dict[str, MonthlySeries] = {}
    errors: dict[str, Exception] = {}
    for name, source in sources.items():
        try:
            loaded[name] = load_source(source, config)
        except (LagdexError, OSError) as err:
            logger.error("cannot load %s: %s", name, err)
            errors[name] = err
    if errors:
        raise SourceLoadError(errors)

    target = loaded.pop(config.target.name)
    registry = SeriesRegistry(
        loaded, target, {n: s.family for n, s in config.candidates.items()}
    )
    if window is not None:
        window = MonthInterval.parse(window)
    else:
        window = config.search.window or target.interval
    required = min_overlap()
    shortfalls = {}
    for name in registry:
        n = registry.overlap(name, window)
        if n < required:
            shortfalls[name] = n
    if shortfalls:
        raise InsufficientOverlap(shortfalls, required)
    logger.info(
        "registry of %d candidates for target %s", len(registry), target.id
    )
    return registry
