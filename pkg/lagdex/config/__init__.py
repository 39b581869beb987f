# TITLE: Config
# DOC-NAME: 00-configs
from __future__ import annotations

from .analysis import SignalSettings, TrendSettings
from .base import Config, YamlConfig
from .named import DictOfNamed, Named
from .outputs import NamedPair, OutputConfig
from .search import MAX_LAG, SearchSettings
from .sources import API_KEY_VARIABLE, RemoteSettings, SeriesSource
from .types import IntervalField, MonthField
