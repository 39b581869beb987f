# TITLE: Search Settings
from __future__ import annotations

import multiprocessing
from typing import Literal

from pydantic import confloat, conint, field_validator, model_validator

from .pretty import PrettyModel
from .types import IntervalField

MAX_LAG = 13


class SearchSettings(PrettyModel, extra="forbid", validate_assignment=True):
    window: IntervalField | None = None
    """Months used for fitting, as "YYYY-MM:YYYY-MM" (both ends inclusive).

    When not given, the full range of the target series is used.
    """

    lag_min: conint(ge=-MAX_LAG, le=MAX_LAG) = 0
    """Smallest lag in months searched for each index.

    Negative lags let the price lead the index.  Set to -13 to search the full
    symmetric range, at roughly four times the cost.
    """

    lag_max: conint(ge=-MAX_LAG, le=MAX_LAG) = MAX_LAG
    """Largest lag in months searched for each index."""

    depth: conint(ge=1) = 8
    """Number of consecutive end months that must agree for a model to be stable."""

    dimension: Literal[2] = 2
    """Number of lagged index terms in each model; only pairs are supported."""

    condition_limit: confloat(gt=1) = 1e10
    """Fits whose column-equilibrated design exceeds this condition number
    are treated as rank deficient."""

    tie_tolerance: confloat(ge=0) = 1e-12
    """Relative difference in rms below which two models count as tied."""

    n_workers: int = 1
    """Number of parallel workers.

    Zero or negative values are counted back from the number of CPUs, so -1
    leaves one CPU free.
    """

    @field_validator("window")
    @classmethod
    def _window_has_length(cls, v):
        if v is not None and not v.start < v.end:
            raise ValueError(f"search window must start before it ends: {v}")
        return v

    @model_validator(mode="after")
    def _lag_bounds_ordered(self):
        if self.lag_min > self.lag_max:
            raise ValueError(
                f"lag_min ({self.lag_min}) is greater than lag_max ({self.lag_max})"
            )
        return self

    @property
    def lags(self) -> range:
        return range(self.lag_min, self.lag_max + 1)

    def workers(self) -> int:
        if self.n_workers <= 0:
            return max(multiprocessing.cpu_count() + self.n_workers, 1)
        return self.n_workers
