"""Exhaustive search for the best two-index lag model.

Every unordered pair of candidate indices is fitted at every combination of
lags on the grid, and the model with the least rms residual wins.  Pairs are
stored with their names in lexicographic order and each lag follows its
name, so ``(COAL, PPI)`` with lags ``(1, 1)`` is the same model however the
candidates were listed.
"""

from __future__ import annotations

import itertools
import logging
import math
import pathlib
from collections.abc import Iterable, Sequence

import joblib
import numpy as np
import pandas as pd
from pydantic import field_validator, model_validator

from ._logging import TimingLog
from .config.outputs import DEFAULT_NAMED_PAIRS, NamedPair
from .config.pretty import PrettyModel
from .config.search import MAX_LAG
from .config.types import IntervalField, MonthField
from .exceptions import InsufficientData, LagdexError, NoFeasibleModel, RankDeficient
from .ingest import SeriesRegistry
from .progressbar import progress_bar
from .regress import (
    DEFAULT_CONDITION_LIMIT,
    LagModel,
    fit_lag_model,
    solve_lag_columns,
    trend_column,
)
from .series import MonthInterval, MonthStamp, lag_label, lagged_values

logger = logging.getLogger("lagdex.search")

Pair = tuple[str, str]
Lags = tuple[int, int]


def grid_size(n_candidates: int, lags: Sequence[int] | int) -> int:
    """Number of fits in a full search, C(n, 2) times the squared lag count."""
    n_lags = lags if isinstance(lags, int) else len(lags)
    return math.comb(n_candidates, 2) * n_lags**2


def unordered_pairs(names: Iterable[str]) -> list[Pair]:
    return list(itertools.combinations(sorted(names), 2))


class SearchSpec(PrettyModel, extra="forbid"):
    target: str
    candidates: list[str]
    lag_min: int = 0
    lag_max: int = MAX_LAG
    window: IntervalField | None = None
    """Fitting months; the target's full range when not given."""

    condition_limit: float = DEFAULT_CONDITION_LIMIT
    tie_tolerance: float = 1e-12

    @field_validator("candidates")
    @classmethod
    def _at_least_two(cls, v):
        if len(set(v)) != len(v):
            raise ValueError("candidate names must be unique")
        if len(v) < 2:
            raise ValueError("a search needs at least two candidates")
        return v

    @model_validator(mode="after")
    def _lag_bounds(self):
        if not -MAX_LAG <= self.lag_min <= self.lag_max <= MAX_LAG:
            raise ValueError(
                f"lags {self.lag_min}..{self.lag_max} "
                f"must lie within -{MAX_LAG}..{MAX_LAG}"
            )
        return self

    @property
    def lags(self) -> range:
        return range(self.lag_min, self.lag_max + 1)

    @property
    def pairs(self) -> list[Pair]:
        return unordered_pairs(self.candidates)

    @classmethod
    def from_config(cls, config, window: MonthInterval | str | None = None):
        """Build from a `lagdex.Config`, optionally overriding its window."""
        return cls(
            target=config.target.name,
            candidates=list(config.candidates),
            lag_min=config.search.lag_min,
            lag_max=config.search.lag_max,
            window=window if window is not None else config.search.window,
            condition_limit=config.search.condition_limit,
            tie_tolerance=config.search.tie_tolerance,
        )

    def resolved_window(self, registry: SeriesRegistry) -> MonthInterval:
        if self.window is not None:
            return self.window
        return registry.get(self.target).interval

    def truncated(self, end: MonthStamp, registry: SeriesRegistry) -> SearchSpec:
        window = self.resolved_window(registry).truncate(end)
        return self.model_copy(update={"window": window})


class RankedFit(PrettyModel, frozen=True):
    pair: Pair
    lags: Lags
    rms: float

    @property
    def key(self) -> tuple[Pair, Lags]:
        return (self.pair, self.lags)


class SkippedFit(PrettyModel, frozen=True):
    pair: Pair
    lags: Lags
    reason: str


class SearchResult(PrettyModel):
    best: LagModel
    ranking: list[RankedFit]
    """Every successful fit, best first, then by ascending rms."""

    evaluated_count: int
    grid_size: int
    skipped: list[SkippedFit] = []

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "CPI1": [r.pair[0] for r in self.ranking],
                "Lag1": [r.lags[0] for r in self.ranking],
                "CPI2": [r.pair[1] for r in self.ranking],
                "Lag2": [r.lags[1] for r in self.ranking],
                "rms": [r.rms for r in self.ranking],
            }
        )

    def skipped_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "CPI1": [s.pair[0] for s in self.skipped],
                "Lag1": [s.lags[0] for s in self.skipped],
                "CPI2": [s.pair[1] for s in self.skipped],
                "Lag2": [s.lags[1] for s in self.skipped],
                "reason": [s.reason for s in self.skipped],
            }
        )

    def write_csv(self, path: str | pathlib.Path, float_format: str = "%.10g"):
        self.to_frame().to_csv(path, index=False, float_format=float_format)
        return pathlib.Path(path)


def _lagged_block(
    registry: SeriesRegistry, names: Sequence[str], lags: range, window
) -> dict[str, np.ndarray]:
    return {
        name: np.stack([lagged_values(registry.get(name), lag, window) for lag in lags])
        for name in names
    }


def _evaluate_pairs(
    y: np.ndarray,
    t: np.ndarray,
    block: dict[str, np.ndarray],
    pairs: Sequence[Pair],
    lags: range,
    condition_limit: float,
) -> tuple[list[RankedFit], list[SkippedFit]]:
    ranked, skipped = [], []
    y_ok = np.isfinite(y)
    for first, second in pairs:
        for (i, lag1), (j, lag2) in itertools.product(enumerate(lags), repeat=2):
            a = block[first][i]
            b = block[second][j]
            mask = y_ok & np.isfinite(a) & np.isfinite(b)
            names = (lag_label(first, lag1), lag_label(second, lag2), "t-2000", "1")
            try:
                solution = solve_lag_columns(y, a, b, t, mask, names, condition_limit)
            except (RankDeficient, InsufficientData) as err:
                skipped.append(
                    SkippedFit(pair=(first, second), lags=(lag1, lag2), reason=str(err))
                )
                continue
            residuals = solution.residuals
            rms = float(np.sqrt(float(residuals @ residuals) / residuals.size))
            ranked.append(RankedFit(pair=(first, second), lags=(lag1, lag2), rms=rms))
    return ranked, skipped


def select_best(ranked: Sequence[RankedFit], tie_tolerance: float) -> RankedFit:
    """Least rms, ties within `tie_tolerance` relative resolved by (pair, lags)."""
    least = min(r.rms for r in ranked)
    tied = [r for r in ranked if r.rms - least <= tie_tolerance * abs(least)]
    return min(tied, key=lambda r: r.key)


def _chunks(items: list, n: int) -> list[list]:
    n = max(1, min(n, len(items)))
    size, extra = divmod(len(items), n)
    out, lo = [], 0
    for k in range(n):
        hi = lo + size + (1 if k < extra else 0)
        out.append(items[lo:hi])
        lo = hi
    return out


def search(
    spec: SearchSpec, registry: SeriesRegistry, workers: int = 1
) -> SearchResult:
    """
    Fit every candidate pair at every lag combination and keep the best.

    Parameters
    ----------
    spec : SearchSpec
    registry : SeriesRegistry
        Must hold the target and every candidate named in `spec`.
    workers : int, default 1
        Parallel processes; the result does not depend on this.

    Raises
    ------
    UnknownSeries
        A name in `spec` is not in `registry`.
    NoFeasibleModel
        Every combination was rank deficient or short of data.
    """
    target = registry.get(spec.target)
    window = spec.resolved_window(registry)
    lags = spec.lags
    pairs = spec.pairs
    block = _lagged_block(registry, spec.candidates, lags, window)
    y = target.values_over(window)
    t = trend_column(window)

    with TimingLog(f"search {window}", log=logger, level=logging.DEBUG):
        if workers > 1 and len(pairs) > 1:
            with joblib.Parallel(n_jobs=workers) as parallel:
                parts = parallel(
                    joblib.delayed(_evaluate_pairs)(
                        y, t, block, chunk, lags, spec.condition_limit
                    )
                    for chunk in _chunks(pairs, workers)
                )
        else:
            parts = [_evaluate_pairs(y, t, block, pairs, lags, spec.condition_limit)]

    ranked = [r for part, _ in parts for r in part]
    skipped = [s for _, part in parts for s in part]
    size = grid_size(len(spec.candidates), lags)
    if not ranked:
        raise NoFeasibleModel(
            f"none of the {size} combinations could be fitted in {window}"
        )
    winner = select_best(ranked, spec.tie_tolerance)
    ranking = sorted(ranked, key=lambda r: (r.rms, r.key))
    ranking.remove(winner)
    ranking.insert(0, winner)

    (first, second), (lag1, lag2) = winner.key
    best = fit_lag_model(
        target,
        (registry.get(first), lag1),
        (registry.get(second), lag2),
        window,
        spec.condition_limit,
    )
    logger.info(
        "best of %d fits (%d skipped): %s(%d), %s(%d), rms %.4g",
        len(ranked),
        len(skipped),
        first,
        lag1,
        second,
        lag2,
        best.rms,
    )
    return SearchResult(
        best=best,
        ranking=ranking,
        evaluated_count=len(ranked),
        grid_size=size,
        skipped=skipped,
    )


class LedgerRow(PrettyModel):
    end_month: MonthField
    best: LagModel | None = None
    error: str | None = None
    stable: bool = False
    """This row and the next older depth - 1 rows share pair and lags."""

    @property
    def key(self) -> tuple[Pair, Lags] | None:
        if self.best is None:
            return None
        return (self.best.names, self.best.lags)


LEDGER_COLUMNS = ["Month", "CPI1", "Lag1", "b1", "CPI2", "Lag2", "b2", "c", "d", "rms"]


class StabilityLedger(PrettyModel):
    rows: list[LedgerRow]
    """One row per end month, most recent first."""

    depth: int = 8

    @model_validator(mode="after")
    def _descending(self):
        months = [r.end_month for r in self.rows]
        if any(a <= b for a, b in zip(months, months[1:])):
            raise ValueError("ledger rows must be in descending month order")
        return self

    @property
    def stable(self) -> bool:
        """The winner is unchanged over the most recent `depth` end months."""
        return bool(self.rows) and self.rows[0].stable

    def to_frame(self) -> pd.DataFrame:
        records = []
        for row in self.rows:
            record = dict.fromkeys(LEDGER_COLUMNS)
            record["Month"] = str(row.end_month)
            if row.best is not None:
                table = row.best.table_row()
                record.update({k: table[k] for k in LEDGER_COLUMNS[1:]})
            record["stable"] = row.stable
            record["error"] = row.error
            records.append(record)
        return pd.DataFrame.from_records(
            records, columns=[*LEDGER_COLUMNS, "stable", "error"]
        )

    def to_text(self) -> str:
        frame = self.to_frame()
        if frame["error"].isna().all():
            frame = frame.drop(columns="error")
        formatters = {
            "b1": "{:.4f}".format,
            "b2": "{:.4f}".format,
            "c": "{:.3f}".format,
            "d": "{:.2f}".format,
            "rms": "{:.2f}".format,
        }
        return frame.to_string(index=False, formatters=formatters, na_rep="-")


def mark_stability(rows: list[LedgerRow], depth: int) -> list[LedgerRow]:
    """Set `stable` on rows ordered most recent first."""
    marked = []
    for i, row in enumerate(rows):
        window = rows[i : i + depth]
        key = row.key
        stable = (
            key is not None
            and len(window) == depth
            and all(r.key == key for r in window)
        )
        marked.append(row.model_copy(update={"stable": stable}))
    return marked


def _ledger_row(spec: SearchSpec, registry: SeriesRegistry, end: MonthStamp):
    try:
        result = search(spec.truncated(end, registry), registry)
    except LagdexError as err:
        logger.warning("no model for end month %s: %s", end, err)
        return LedgerRow(end_month=end, error=str(err))
    return LedgerRow(end_month=end, best=result.best)


def stability_scan(
    spec: SearchSpec,
    registry: SeriesRegistry,
    end_months: Sequence[MonthStamp | str],
    depth: int = 8,
    workers: int = 1,
    progress: bool = False,
) -> StabilityLedger:
    """
    Repeat the search with the window ending at each of `end_months`.

    A failing end month is recorded in its row and the scan continues.
    """
    months = sorted({MonthStamp.parse(m) for m in end_months})
    with TimingLog(f"stability scan over {len(months)} end months", log=logger):
        if workers > 1 and len(months) > 1:
            with joblib.Parallel(n_jobs=workers) as parallel:
                rows = parallel(
                    joblib.delayed(_ledger_row)(spec, registry, m) for m in months
                )
        else:
            rows = []
            with progress_bar("end months", len(months), show=progress) as bar:
                for m in months:
                    rows.append(_ledger_row(spec, registry, m))
                    bar.tick()
    rows = mark_stability(list(reversed(rows)), depth)
    return StabilityLedger(rows=rows, depth=depth)


def default_end_months(
    spec: SearchSpec, registry: SeriesRegistry, depth: int
) -> list[MonthStamp]:
    """The last `depth` months of the search window."""
    end = spec.resolved_window(registry).end
    return [end - k for k in range(depth - 1, -1, -1)]


class NamedPairResult(PrettyModel):
    pair: Pair
    best: LagModel
    """Best fit of this pair over the lag grid."""

    reference_lags: Lags | None = None
    reference_sigma: float | None = None
    reference_fit: LagModel | None = None
    """Fit at the reference lags, when those are given and feasible."""


class NamedComparison(PrettyModel):
    target: str
    window: IntervalField
    results: list[NamedPairResult]

    def to_frame(self) -> pd.DataFrame:
        records = []
        for r in self.results:
            row = {"pair": f"{r.pair[0]},{r.pair[1]}", **r.best.table_row()}
            row["reference_lags"] = (
                None if r.reference_lags is None else "{},{}".format(*r.reference_lags)
            )
            row["reference_sigma"] = r.reference_sigma
            row["reference_rms"] = (
                None if r.reference_fit is None else r.reference_fit.rms
            )
            records.append(row)
        return pd.DataFrame.from_records(records)

    def to_text(self) -> str:
        lines = []
        for r in self.results:
            lines.append(r.best.equation(self.target))
            if r.reference_fit is not None:
                lines.append(f"  at reference lags: {r.reference_fit.equation()}")
            if r.reference_sigma is not None:
                lines.append(f"  reference σ = ${r.reference_sigma:.2f}")
        return "\n".join(lines)


def compare_named_models(
    registry: SeriesRegistry,
    window: MonthInterval | str | None = None,
    pairs: Sequence[NamedPair] = DEFAULT_NAMED_PAIRS,
    lags: range = range(0, MAX_LAG + 1),
    condition_limit: float = DEFAULT_CONDITION_LIMIT,
    tie_tolerance: float = 1e-12,
) -> NamedComparison:
    """
    Fit fixed index pairs side by side, each at its best lags on the grid.

    Raises
    ------
    UnknownSeries
        A named series is not in `registry`.
    """
    target = registry.target
    window = MonthInterval.parse(window) if window is not None else target.interval
    results = []
    for named in pairs:
        for name in named.pair:
            registry.get(name)
        spec = SearchSpec(
            target=target.id,
            candidates=list(named.pair),
            lag_min=lags.start,
            lag_max=lags.stop - 1,
            window=window,
            condition_limit=condition_limit,
            tie_tolerance=tie_tolerance,
        )
        found = search(spec, registry)
        reference_fit = None
        if named.reference_lags is not None:
            (n1, n2), (l1, l2) = named.pair, named.reference_lags
            try:
                reference_fit = fit_lag_model(
                    target,
                    (registry.get(n1), l1),
                    (registry.get(n2), l2),
                    window,
                    condition_limit,
                )
            except (RankDeficient, InsufficientData) as err:
                logger.warning("reference fit of %s,%s failed: %s", n1, n2, err)
        reference_lags = None
        if named.reference_lags is not None:
            by_name = dict(zip(named.pair, named.reference_lags))
            reference_lags = tuple(by_name[n] for n in found.best.names)
        results.append(
            NamedPairResult(
                pair=found.best.names,
                best=found.best,
                reference_lags=reference_lags,
                reference_sigma=named.reference_sigma,
                reference_fit=reference_fit,
            )
        )
    return NamedComparison(target=target.id, window=window, results=results)
