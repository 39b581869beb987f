from __future__ import annotations

from collections.abc import Iterable
from typing import Any

from pydantic import BaseModel

from lagdex.series import MonthInterval, MonthStamp


def _short_repr(v: Any) -> str:
    if isinstance(v, MonthStamp | MonthInterval):
        return str(v)
    text = repr(v)
    if isinstance(v, list) and len(text) > 70:
        text = "- " + "\n- ".join(_short_repr(item) for item in v)
    return text


def _render(v: Any, indent: int) -> str:
    if hasattr(v, "__repr_with_indent__"):
        return v.__repr_with_indent__(0)
    if isinstance(v, dict):
        return repr_dict_with_indent(v, indent)
    return _short_repr(v)


def _yaml_lines(items: Iterable[tuple[str, Any]], indent: int) -> str:
    pad = " " * indent
    lines = []
    for key, value in items:
        text = _render(value, indent)
        if "\n" in text:
            text = "\n  " + text.replace("\n", "\n  ")
        lines.append(f"{pad}{key}: {text}")
    return "\n".join(lines)


def repr_dict_with_indent(d: dict[str, Any], indent=0) -> str:
    return _yaml_lines(d.items(), indent)


class PrettyModel(BaseModel):
    """Base model whose repr reads like the YAML it was loaded from."""

    def __repr_with_indent__(self, indent=0):
        return _yaml_lines(self, indent)

    def __repr__(self):
        return f"{type(self).__name__}:\n" + self.__repr_with_indent__(2)
