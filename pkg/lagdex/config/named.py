"""Mappings of config items keyed by their own `name` field."""

from __future__ import annotations

from typing import Annotated, TypeVar

from pydantic.functional_validators import BeforeValidator

from .pretty import PrettyModel


class Named(PrettyModel):
    name: str


T = TypeVar("T", bound=Named)


def _item_name(item) -> str | None:
    if isinstance(item, dict):
        return item.get("name")
    return getattr(item, "name", None)


def enforce_name(x: dict[str, T] | list[T]) -> dict[str, T]:
    """Key every item by its name.

    A list is turned into a dict, and each item must carry a name not used by
    an earlier item.  In a dict, an item without a name takes its key, and an
    explicit name must equal the key.
    """
    if isinstance(x, list):
        keyed = {}
        for position, item in enumerate(x):
            name = _item_name(item)
            if not name:
                raise ValueError(f"missing name in position {position}")
            if name in keyed:
                raise ValueError(f"duplicate name {name!r} in position {position}")
            keyed[name] = item
        x = keyed
    for key, item in x.items():
        if isinstance(item, dict) and not item.get("name"):
            item["name"] = key
        name = _item_name(item)
        if name != key:
            raise ValueError(f"explicit name {name!r} does not match key {key!r}")
    return x


DictOfNamed = Annotated[dict[str, T], BeforeValidator(enforce_name)]
