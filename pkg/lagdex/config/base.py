# TITLE: Config
# DOC-NAME: 00-configs
from __future__ import annotations

import gzip
import io
import logging
import os
import pathlib
import typing
from typing import Any, Literal

import addicty
import yaml
from pydantic import PrivateAttr, model_validator

from .analysis import SignalSettings, TrendSettings
from .named import DictOfNamed
from .outputs import DEFAULT_NAMED_PAIRS, NamedPair, OutputConfig
from .pretty import PrettyModel, repr_dict_with_indent
from .search import SearchSettings
from .sources import RemoteSettings, SeriesSource

if typing.TYPE_CHECKING:
    from pydantic.main import IncEx

logger = logging.getLogger("lagdex.config")


TConfig = typing.TypeVar("TConfig", bound="YamlConfig")


class YamlConfig(PrettyModel):
    _base_dir: pathlib.Path | None = PrivateAttr(default=None)

    @classmethod
    def _load_unformatted_yaml(
        cls: type[TConfig],
        filenames: str | pathlib.Path | list[str] | list[pathlib.Path],
    ) -> addicty.Dict:
        """Merge YAML files, or YAML text, into one unvalidated tree.

        Files named under an ``include`` key are merged first, so the
        including file wins on conflicting keys.
        """
        if isinstance(filenames, str | pathlib.Path):
            filenames = [filenames]
        merged = addicty.Dict()
        for item in filenames:
            if isinstance(item, str) and "\n" in item:
                # literal YAML; includes have no directory to resolve against
                merged.update(addicty.Dict.load(item, freeze=False))
                continue
            path = pathlib.Path(item)
            opener = gzip.open if path.suffix == ".gz" else open
            with opener(path) as f:
                content = addicty.Dict.load(f, freeze=False)
            included = content.pop("include", None)
            if isinstance(included, str):
                included = [included]
            if included:
                merged.update(
                    cls._load_unformatted_yaml(
                        [path.parent.joinpath(i) for i in included]
                    )
                )
            merged.update(content)
            logger.info("loaded config from %s", path)
        return merged

    @classmethod
    def from_yaml(
        cls: type[TConfig],
        filenames: str | pathlib.Path | list[pathlib.Path],
    ) -> TConfig:
        """
        Read and validate a config from one or more YAML files.

        Parameters
        ----------
        filenames : path-like or list[path-like]
            Files merged in order, keys in later files replacing earlier
            ones.  Data paths in the config are relative to the first file.

        Returns
        -------
        Config
        """
        if isinstance(filenames, str | pathlib.Path):
            filenames = [filenames]
        merged = cls._load_unformatted_yaml(filenames)
        result = cls.model_validate(merged.to_dict())
        first = filenames[0] if filenames else None
        if isinstance(first, str | pathlib.Path) and "\n" not in str(first):
            result._base_dir = pathlib.Path(first).parent
        return result

    tags: dict[str, Any] = {}
    """Tags that can be used in format strings in the config."""

    @model_validator(mode="before")
    @classmethod
    def _parse_format_tags(cls, data: Any) -> Any:
        """Substitute `{tag}` fields in every string of the config."""
        if not isinstance(data, dict):
            return data
        tags = dict(data.get("tags") or {})
        if "scenario" in data:
            tags["scenario"] = data["scenario"]
        if not tags:
            return data

        def substitute(node):
            if isinstance(node, dict):
                return {k: substitute(v) for k, v in node.items()}
            if isinstance(node, list):
                return [substitute(v) for v in node]
            if isinstance(node, str):
                return node.format(**tags)
            return node

        return substitute(data)

    def resolve_path(self, path: str | os.PathLike) -> pathlib.Path:
        """Resolve a path from the config against the config file directory."""
        path = pathlib.Path(path)
        if path.is_absolute() or self._base_dir is None:
            return path
        return self._base_dir.joinpath(path)

    def to_yaml(
        self,
        stream: str | os.PathLike | io.IOBase | None = None,
        *,
        exclude: IncEx = None,
        exclude_defaults: bool = False,
    ) -> None | bytes:
        """
        Dump the config as YAML.

        Months are written as ``YYYY-MM`` strings, so the output loads back
        with `from_yaml`.  Without a stream the YAML is returned as bytes.
        """
        tree = self.model_dump(
            mode="json", exclude=exclude, exclude_defaults=exclude_defaults
        )
        content = yaml.dump(
            tree, encoding="utf8", Dumper=yaml.SafeDumper, sort_keys=False
        )
        if stream is None:
            return content
        if isinstance(stream, str | os.PathLike):
            pathlib.Path(stream).write_bytes(content)
        elif isinstance(stream, io.TextIOBase):
            stream.write(content.decode())
        else:
            stream.write(content)


class Config(YamlConfig, extra="forbid"):
    config_version: Literal[1] = 1
    """Version of this configuration format."""

    scenario: str = "lagdex"
    """Name for this analysis, used to label reports."""

    target: SeriesSource
    """The stock price series to model.

    Prices must already be adjusted for dividends and splits.
    """

    candidates: DictOfNamed[SeriesSource] = {}
    """Candidate defining indices, keyed by symbolic name.

    Every unordered pair of candidates is tried by the model search.

    Example
    -------
    ```{yaml}
    candidates:
      - name: C
        path: data/cpi.csv
        series_id: CUUR0000SA0
      - name: PPI
        path: data/ppi.csv
        family: PPI
    ```
    """

    remote: RemoteSettings = RemoteSettings()
    """
    See [lagdex.config.RemoteSettings][] for detailed documentation.
    """

    search: SearchSettings = SearchSettings()
    """
    See [lagdex.config.SearchSettings][] for detailed documentation.
    """

    trend: TrendSettings = TrendSettings()
    """
    See [lagdex.config.TrendSettings][] for detailed documentation.
    """

    signal: SignalSettings = SignalSettings()
    """
    See [lagdex.config.SignalSettings][] for detailed documentation.
    """

    named_pairs: list[NamedPair] = DEFAULT_NAMED_PAIRS
    """Fixed index pairs fitted side by side by the `compare` command."""

    outputs: OutputConfig = OutputConfig()

    @model_validator(mode="after")
    def _target_is_not_a_candidate(self):
        if self.target.name in self.candidates:
            raise ValueError(
                f"target {self.target.name!r} is also listed as a candidate"
            )
        return self

    @model_validator(mode="after")
    def _candidates_are_indices(self):
        for name, source in self.candidates.items():
            if source.family == "price":
                raise ValueError(f"candidate {name!r} must be a CPI or PPI")
        return self

    def __repr__(self):
        lines = []
        for key, value in self:
            if key == "candidates":
                text = f"<{len(value)} candidates: {', '.join(value)}>"
            elif isinstance(value, dict):
                text = repr_dict_with_indent(value, 2)
            elif hasattr(value, "__repr_with_indent__"):
                text = value.__repr_with_indent__(2)
            else:
                text = repr(value)
            if "\n" in text:
                text = "\n    " + text.replace("\n", "\n    ")
            lines.append(f"  {key}: {text}")
        return "lagdex.Config:\n" + "\n".join(lines)
