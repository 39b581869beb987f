try:
    from ._version import __version__, __version_tuple__
except ImportError:  # not built by setuptools_scm
    from importlib.metadata import PackageNotFoundError, version

    try:
        __version__ = version("lagdex")
    except PackageNotFoundError:
        __version__ = "0.0.0+unknown"
    __version_tuple__ = tuple(__version__.split("."))

from .config import Config
from .exceptions import LagdexError
from .ingest import SeriesRegistry, build_registry, load_csv, write_csv
from .regress import (
    LagModel,
    SimpleDiffModel,
    fit_lag_model,
    fit_simple_diff,
    load_model,
    predict,
    save_model,
)
from .search import (
    SearchResult,
    SearchSpec,
    StabilityLedger,
    compare_named_models,
    stability_scan,
)
from .series import MonthInterval, MonthlySeries, MonthStamp, align, diff, shift
from .signal import deviation_series, find_episodes
from .trend import detect_breakpoints, fit_segment, mirror_forecast

__all__ = [
    "Config",
    "LagdexError",
    "LagModel",
    "MonthInterval",
    "MonthlySeries",
    "MonthStamp",
    "SearchResult",
    "SearchSpec",
    "SeriesRegistry",
    "SimpleDiffModel",
    "StabilityLedger",
    "align",
    "build_registry",
    "compare_named_models",
    "demo_config",
    "detect_breakpoints",
    "deviation_series",
    "diff",
    "find_episodes",
    "fit_lag_model",
    "fit_segment",
    "fit_simple_diff",
    "load_csv",
    "load_model",
    "mirror_forecast",
    "predict",
    "save_model",
    "shift",
    "stability_scan",
    "write_csv",
    "__version__",
    "__version_tuple__",
]


def demo_config(name: str = "cop-2012"):
    """Path to a packaged example configuration."""
    import importlib.resources

    if not name.endswith(".yaml"):
        name = f"{name}.yaml"
    return importlib.resources.files(__package__).joinpath("configs").joinpath(name)


def logging(level=None):
    from ._logging import log_to_console

    log_to_console(level)
