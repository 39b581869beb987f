"""Least-squares fits of lagged index models.

Two model shapes are supported:

`LagModel`
    price(t) = b1 * X1(t - lag1) + b2 * X2(t - lag2) + c * (t - 2000) + d

`SimpleDiffModel`
    price(t) = a + b * dCPI(t - lag)

Time t is measured in fractional calendar years, January 2000 being 2000.0.
A negative lag lets the price lead the index, so ``dCPI(t + 1)`` is stored
as lag -1.
"""

from __future__ import annotations

import json
import logging
import pathlib
from collections.abc import Sequence
from typing import Annotated, ClassVar, Literal

import numpy as np
import scipy.linalg
from pydantic import ConfigDict, Field, TypeAdapter

from .config.pretty import PrettyModel
from .config.types import IntervalField
from .exceptions import InsufficientData, RankDeficient
from .ingest import MIN_EXTRA_OBSERVATIONS, SeriesRegistry
from .series import (
    MonthInterval,
    MonthlySeries,
    diff,
    lag_label,
    lagged_values,
)

logger = logging.getLogger("lagdex.regress")

TREND_ORIGIN = 2000.0
DEFAULT_CONDITION_LIMIT = 1e10
SCHEMA_VERSION = 1


def trend_column(interval: MonthInterval) -> np.ndarray:
    """Years since January 2000 for every month of `interval`."""
    return (np.arange(len(interval)) + interval.start.index) / 12.0 - TREND_ORIGIN


class LeastSquaresSolution:
    __slots__ = ("coefficients", "residuals", "condition")

    def __init__(self, coefficients, residuals, condition):
        self.coefficients = coefficients
        self.residuals = residuals
        self.condition = condition

    @property
    def sse(self) -> float:
        return float(self.residuals @ self.residuals)


def least_squares(
    X: np.ndarray,
    y: np.ndarray,
    columns: Sequence[str],
    condition_limit: float = DEFAULT_CONDITION_LIMIT,
) -> LeastSquaresSolution:
    """
    Solve min ||y - X b|| by pivoted QR of the column-equilibrated design.

    Parameters
    ----------
    X : array of shape (n, p)
    y : array of shape (n,)
    columns : sequence of str
        Column names, used to report collinear columns.
    condition_limit : float
        Largest acceptable 2-norm condition number of the equilibrated design.

    Raises
    ------
    RankDeficient
        The condition number exceeds `condition_limit` or is not finite.
    """
    scale = np.sqrt(np.einsum("ij,ij->j", X, X))
    scale[scale == 0] = 1.0
    Q, R, piv = scipy.linalg.qr(X / scale, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    with np.errstate(divide="ignore", invalid="ignore"):
        condition = float(np.linalg.cond(R)) if diag[0] > 0 else float("inf")
    if not np.isfinite(condition) or condition > condition_limit:
        weak = [
            columns[piv[k]]
            for k in range(1, len(diag))
            if diag[k] * condition_limit <= diag[0]
        ]
        if not weak:
            weak = [columns[piv[-1]]]
        # report the leading pivot alongside the dependent columns
        partner = columns[piv[0]]
        if partner not in weak:
            weak = [partner, *weak]
        raise RankDeficient(weak, condition)
    z = scipy.linalg.solve_triangular(R, Q.T @ y, lower=False)
    beta = np.empty_like(z)
    beta[piv] = z
    beta /= scale
    residuals = y - X @ beta
    return LeastSquaresSolution(beta, residuals, condition)


def lag_design(a: np.ndarray, b: np.ndarray, t: np.ndarray) -> np.ndarray:
    return np.column_stack([a, b, t, np.ones_like(t)])


def _residual_series(
    name: str, window: MonthInterval, mask: np.ndarray, residuals: np.ndarray
) -> MonthlySeries:
    full = np.full(len(window), np.nan)
    full[mask] = residuals
    used = np.flatnonzero(mask)
    return MonthlySeries(
        name, window.start + int(used[0]), full[used[0] : used[-1] + 1]
    )


def _used_window(window: MonthInterval, mask: np.ndarray) -> MonthInterval:
    used = np.flatnonzero(mask)
    return MonthInterval(window.start + int(used[0]), window.start + int(used[-1]))


def _format_number(x: float, decimals: int, leading: bool) -> str:
    text = f"{abs(x):.{decimals}f}"
    if leading:
        return f"-{text}" if x < 0 else text
    return f" - {text}" if x < 0 else f" + {text}"


def _time_label(lag: int) -> str:
    if lag == 0:
        return "(t)"
    return f"(t-{lag})" if lag > 0 else f"(t+{-lag})"


class LagTerm(PrettyModel, frozen=True):
    series_name: str
    lag: int
    """Months by which the index observation precedes the price month."""

    coefficient: float


class _FittedModel(PrettyModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    schema_version: Literal[1] = SCHEMA_VERSION
    target_name: str
    window: IntervalField
    """First and last months used in the fit."""

    rms: float
    """Root mean squared residual, dividing by the number of observations."""

    stderr_dof: float
    """Residual standard error, dividing by observations less parameters."""

    n_obs: int
    condition: float
    """Condition number of the column-equilibrated design."""

    residuals: MonthlySeries | None = Field(default=None, exclude=True, repr=False)

    def sigma_text(self) -> str:
        return f"σ = ${self.rms:.2f} (rms), ${self.stderr_dof:.2f} (dof)"


class LagModel(_FittedModel):
    """A fitted two-index lag model with linear trend and intercept."""

    kind: Literal["lag"] = "lag"
    terms: tuple[LagTerm, LagTerm]
    trend_coeff: float
    """Price change per calendar year."""

    intercept: float

    n_parameters: ClassVar[int] = 4

    @property
    def names(self) -> tuple[str, str]:
        return (self.terms[0].series_name, self.terms[1].series_name)

    @property
    def lags(self) -> tuple[int, int]:
        return (self.terms[0].lag, self.terms[1].lag)

    def coefficient_vector(self) -> np.ndarray:
        return np.array(
            [
                self.terms[0].coefficient,
                self.terms[1].coefficient,
                self.trend_coeff,
                self.intercept,
            ]
        )

    def equation(self, target: str | None = None) -> str:
        """Render as e.g. ``COP(t) = 1.269PPI(t-1) - 0.615COAL(t-1) + ...``."""
        target = target or self.target_name
        parts = []
        for n, term in enumerate(self.terms):
            parts.append(
                _format_number(term.coefficient, 3, leading=n == 0)
                + term.series_name
                + _time_label(term.lag)
            )
        parts.append(_format_number(self.trend_coeff, 2, leading=False) + "(t-2000)")
        parts.append(_format_number(self.intercept, 2, leading=False))
        return f"{target}(t) = {''.join(parts)}; {self.sigma_text()}"

    def table_row(self) -> dict:
        (t1, t2) = self.terms
        return {
            "CPI1": t1.series_name,
            "Lag1": t1.lag,
            "b1": t1.coefficient,
            "CPI2": t2.series_name,
            "Lag2": t2.lag,
            "b2": t2.coefficient,
            "c": self.trend_coeff,
            "d": self.intercept,
            "rms": self.rms,
            "stderr_dof": self.stderr_dof,
        }


class SimpleDiffModel(_FittedModel):
    """A fitted two-parameter model on the difference of two indices."""

    kind: Literal["dcpi"] = "dcpi"
    slope: float
    intercept: float
    lag: int
    dcpi_name: str
    components: tuple[str, str] | None = None
    """Names of the minuend and subtrahend, so the difference can be rebuilt."""

    n_parameters: ClassVar[int] = 2

    def equation(self, target: str | None = None) -> str:
        target = target or self.target_name
        return (
            f"{target}(t) = "
            + _format_number(self.slope, 3, leading=True)
            + f"{self.dcpi_name}{_time_label(self.lag)}"
            + _format_number(self.intercept, 2, leading=False)
            + f"; {self.sigma_text()}"
        )


FittedModel = Annotated[LagModel | SimpleDiffModel, Field(discriminator="kind")]
_model_adapter = TypeAdapter(FittedModel)


def _statistics(residuals: np.ndarray, n_parameters: int) -> tuple[float, float]:
    n = residuals.size
    sse = float(residuals @ residuals)
    return float(np.sqrt(sse / n)), float(np.sqrt(sse / (n - n_parameters)))


def fit_lag_model(
    target: MonthlySeries,
    x1: tuple[MonthlySeries, int],
    x2: tuple[MonthlySeries, int],
    window: MonthInterval | str | None = None,
    condition_limit: float = DEFAULT_CONDITION_LIMIT,
) -> LagModel:
    """
    Fit ``target(t) = b1 x1(t - lag1) + b2 x2(t - lag2) + c (t - 2000) + d``.

    Parameters
    ----------
    target : MonthlySeries
    x1, x2 : (MonthlySeries, int)
        Index series and lag in months.
    window : MonthInterval or str, optional
        Months to fit; defaults to the target's range.  Months where any
        lagged regressor or the target is missing are skipped.
    condition_limit : float

    Raises
    ------
    InsufficientData
        Fewer than 16 usable months.
    RankDeficient
        Collinear columns, e.g. the same series twice at the same lag.
    """
    window = MonthInterval.parse(window) if window is not None else target.interval
    (s1, lag1), (s2, lag2) = x1, x2
    y = target.values_over(window)
    a = lagged_values(s1, lag1, window)
    b = lagged_values(s2, lag2, window)
    t = trend_column(window)
    names = (lag_label(s1.id, lag1), lag_label(s2.id, lag2), "t-2000", "1")
    mask = np.isfinite(y) & np.isfinite(a) & np.isfinite(b)
    solution = solve_lag_columns(y, a, b, t, mask, names, condition_limit)
    rms, stderr = _statistics(solution.residuals, 4)
    coef = solution.coefficients
    return LagModel(
        target_name=target.id,
        terms=(
            LagTerm(series_name=s1.id, lag=int(lag1), coefficient=float(coef[0])),
            LagTerm(series_name=s2.id, lag=int(lag2), coefficient=float(coef[1])),
        ),
        trend_coeff=float(coef[2]),
        intercept=float(coef[3]),
        window=_used_window(window, mask),
        rms=rms,
        stderr_dof=stderr,
        n_obs=int(mask.sum()),
        condition=solution.condition,
        residuals=_residual_series(
            f"{target.id}-residual", window, mask, solution.residuals
        ),
    )


def solve_lag_columns(
    y: np.ndarray,
    a: np.ndarray,
    b: np.ndarray,
    t: np.ndarray,
    mask: np.ndarray,
    names: Sequence[str],
    condition_limit: float = DEFAULT_CONDITION_LIMIT,
) -> LeastSquaresSolution:
    """Least squares on pre-lagged columns, restricted to rows in `mask`."""
    n = int(mask.sum())
    required = 4 + MIN_EXTRA_OBSERVATIONS
    if n < required:
        raise InsufficientData(
            f"{n} usable months for {names[0]} and {names[1]}, need {required}",
            available=n,
            required=required,
        )
    return least_squares(
        lag_design(a[mask], b[mask], t[mask]), y[mask], names, condition_limit
    )


def fit_simple_diff(
    target: MonthlySeries,
    dcpi: MonthlySeries,
    lag: int,
    window: MonthInterval | str | None = None,
    condition_limit: float = DEFAULT_CONDITION_LIMIT,
    components: tuple[str, str] | None = None,
) -> SimpleDiffModel:
    """
    Fit ``target(t) = a + b dcpi(t - lag)``.

    A price leading the index difference by one month, ``dCPI(t + 1)``, is
    lag -1.  `components` names the two series whose difference is `dcpi`
    so that `predict` can rebuild it from a registry.
    """
    window = MonthInterval.parse(window) if window is not None else target.interval
    y = target.values_over(window)
    x = lagged_values(dcpi, lag, window)
    mask = np.isfinite(y) & np.isfinite(x)
    n = int(mask.sum())
    required = 2 + MIN_EXTRA_OBSERVATIONS
    if n < required:
        raise InsufficientData(
            f"{n} usable months for {dcpi.id}, need {required}",
            available=n,
            required=required,
        )
    X = np.column_stack([x[mask], np.ones(n)])
    solution = least_squares(
        X, y[mask], (lag_label(dcpi.id, lag), "1"), condition_limit
    )
    rms, stderr = _statistics(solution.residuals, 2)
    if components is None and dcpi.id.count("-") == 1:
        components = tuple(dcpi.id.split("-"))
    return SimpleDiffModel(
        target_name=target.id,
        slope=float(solution.coefficients[0]),
        intercept=float(solution.coefficients[1]),
        lag=int(lag),
        dcpi_name=dcpi.id,
        components=components,
        window=_used_window(window, mask),
        rms=rms,
        stderr_dof=stderr,
        n_obs=n,
        condition=solution.condition,
        residuals=_residual_series(
            f"{target.id}-residual", window, mask, solution.residuals
        ),
    )


def _dcpi_from_registry(model: SimpleDiffModel, registry: SeriesRegistry):
    if model.components is not None and model.dcpi_name not in registry:
        minuend, subtrahend = model.components
        return diff(registry.get(minuend), registry.get(subtrahend))
    return registry.get(model.dcpi_name)


def predict(
    model: LagModel | SimpleDiffModel,
    registry: SeriesRegistry,
    months: MonthInterval | str | None = None,
) -> MonthlySeries:
    """
    Evaluate a fitted model over `months` (default: the fitting window).

    Months where a lagged regressor is unavailable are missing in the
    result; nothing is extrapolated.

    Raises
    ------
    UnknownSeries
        The model references a name absent from `registry`.
    """
    months = MonthInterval.parse(months) if months is not None else model.window
    if isinstance(model, LagModel):
        (t1, t2) = model.terms
        a = lagged_values(registry.get(t1.series_name), t1.lag, months)
        b = lagged_values(registry.get(t2.series_name), t2.lag, months)
        values = lag_design(a, b, trend_column(months)) @ model.coefficient_vector()
    else:
        x = lagged_values(_dcpi_from_registry(model, registry), model.lag, months)
        values = model.slope * x + model.intercept
    return MonthlySeries(f"{model.target_name}-predicted", months.start, values)


def fitted(
    model: LagModel | SimpleDiffModel, registry: SeriesRegistry
) -> MonthlySeries:
    """Predictions over the fitting window."""
    return predict(model, registry, model.window)


def save_model(model: LagModel | SimpleDiffModel, path: str | pathlib.Path):
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def load_model(path: str | pathlib.Path) -> LagModel | SimpleDiffModel:
    text = pathlib.Path(path).read_text(encoding="utf-8")
    data = json.loads(text)
    if isinstance(data, dict) and "best" in data and "kind" not in data:
        # a search result document; use its winner
        data = data["best"]
    return _model_adapter.validate_python(data)
