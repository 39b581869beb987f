# TITLE: Series Sources
from __future__ import annotations

import os
import pathlib
from typing import Literal

from pydantic import confloat, conint, model_validator

from .named import Named
from .pretty import PrettyModel

API_KEY_VARIABLE = "LAGDEX_API_KEY"


class SeriesSource(Named, extra="forbid"):
    """Where to find one monthly series.

    Give either a local `path` to a CSV file in the `series_id,YYYY-MM,value`
    format, or a remote `series_id` to download through the configured
    remote endpoint.  When both are given, the CSV file is used and
    `series_id` selects the rows of a file that holds several series.

    Example
    -------
    ```{yaml}
    candidates:
      PPI:
        path: data/ppi.csv
        family: PPI
      COAL:
        series_id: WPU051
        family: PPI
    ```
    """

    path: pathlib.Path | None = None
    """Local CSV file, relative to the directory of the first config file."""

    series_id: str | None = None
    """Identifier of the series at the remote endpoint, or inside the CSV file."""

    family: Literal["CPI", "PPI", "price"] = "CPI"
    """Index family, recorded as metadata only."""

    description: str = ""

    @model_validator(mode="after")
    def _has_a_location(self):
        if self.path is None and not self.series_id:
            raise ValueError(f"series {self.name!r} needs a path or a series_id")
        return self


class RemoteSettings(PrettyModel, extra="forbid", validate_assignment=True):
    endpoint: str = "https://api.bls.gov/publicAPI/v2/timeseries/data/"
    """URL of a BLS-style time series service."""

    api_key: str | None = None
    """Registration key sent with every request.

    When not set here, the `LAGDEX_API_KEY` environment variable is used.
    """

    timeout: confloat(gt=0) = 30.0
    """Seconds to wait for the endpoint before giving up."""

    years_per_request: conint(ge=1, le=20) = 20
    """Longer ranges are split into several requests of at most this many years."""

    def resolved_api_key(self) -> str | None:
        return self.api_key or os.environ.get(API_KEY_VARIABLE) or None
