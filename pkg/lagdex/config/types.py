"""Pydantic field types for calendar months."""

from __future__ import annotations

from typing import Annotated

from pydantic import PlainSerializer, PlainValidator, WithJsonSchema

from lagdex.series import MonthInterval, MonthStamp

MonthField = Annotated[
    MonthStamp,
    PlainValidator(MonthStamp.parse),
    PlainSerializer(str, return_type=str),
    WithJsonSchema({"type": "string", "pattern": r"^\d{4}-\d{2}$"}),
]
"""A month written as "YYYY-MM"."""

IntervalField = Annotated[
    MonthInterval,
    PlainValidator(MonthInterval.parse),
    PlainSerializer(str, return_type=str),
    WithJsonSchema({"type": "string", "pattern": r"^\d{4}-\d{2}:\d{4}-\d{2}$"}),
]
"""An inclusive month interval written as "YYYY-MM:YYYY-MM"."""
