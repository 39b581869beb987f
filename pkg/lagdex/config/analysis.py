# TITLE: Trend and Signal Settings
from __future__ import annotations

from pydantic import confloat, conint, model_validator

from .pretty import PrettyModel


class TrendSettings(PrettyModel, extra="forbid", validate_assignment=True):
    max_breaks: conint(ge=0) = 2
    """Largest number of turning points considered."""

    min_segment: conint(ge=2) = 36
    """Shortest allowed trend segment, in months."""

    gap_max: conint(ge=0) = 0
    """Longest transition interval, in months, left unfitted around a break.

    The default of zero gives a contiguous segmentation.
    """

    min_year: int = 1982
    """Segments starting before this year are flagged as non-informative.

    Before the early 1980s most index subcategories moved in parallel, so
    their differences are nearly constant.
    """


class SignalSettings(PrettyModel, extra="forbid", validate_assignment=True):
    enter: confloat(gt=0) = 2.0
    """A deviation episode opens at this multiple of the model rms."""

    exit: confloat(ge=0) = 1.0
    """An open episode closes at this multiple of the model rms."""

    @model_validator(mode="after")
    def _hysteresis(self):
        if not self.exit < self.enter:
            raise ValueError(
                f"exit threshold ({self.exit}) must be below enter ({self.enter})"
            )
        return self
