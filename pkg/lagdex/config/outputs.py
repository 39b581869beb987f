from __future__ import annotations

import pathlib

from pydantic import field_validator

from .pretty import PrettyModel


class NamedPair(PrettyModel, extra="forbid"):
    """A fixed pair of indices fitted side by side by `compare`."""

    pair: tuple[str, str]

    reference_lags: tuple[int, int] | None = None
    """Lags of a previously published fit, shown next to the optimum found."""

    reference_sigma: float | None = None
    """Standard error of a previously published fit, in price units."""

    @field_validator("pair")
    @classmethod
    def _distinct(cls, v):
        if v[0] == v[1]:
            raise ValueError(f"a named pair needs two different series, got {v}")
        return v


DEFAULT_NAMED_PAIRS = [
    NamedPair(pair=("C", "CC"), reference_lags=(0, 12), reference_sigma=6.21),
    NamedPair(pair=("CC", "E"), reference_lags=(12, 0), reference_sigma=5.98),
    NamedPair(pair=("PPI", "OIL"), reference_lags=(0, 2), reference_sigma=6.35),
]


class OutputConfig(PrettyModel, extra="forbid", validate_assignment=True):
    out_dir: pathlib.Path = pathlib.Path("lagdex-output")
    """Directory for reports, relative to the working directory."""

    float_format: str = "%.10g"
    """printf-style format used for floats in CSV outputs."""
