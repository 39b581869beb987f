from __future__ import annotations

import logging
import sys
import time
from typing import Literal

LOGGER_NAME = "lagdex"
FILE_LOG_FORMAT = "%(name)s.%(levelname)s: %(message)s"
CONSOLE_LOG_FORMAT = {
    "elapsed": "[{elapsedTime}] {levelname:s}: {message:s}",
    "std": "{name}.{levelname}: {message}",
}
DEFAULT_LOG_LEVEL = logging.INFO

logger = logging.getLogger(LOGGER_NAME)


def timesize_stack(t: float) -> str:
    """Render a duration in seconds as e.g. ``2m 3.40s``."""
    parts = []
    for unit, size in (("d", 86400), ("h", 3600), ("m", 60)):
        if t >= size:
            parts.append(f"{t // size:.0f}{unit}")
            t %= size
    parts.append(f"{t:.2f}s")
    return " ".join(parts)


def _lower_level(level: int | None) -> int:
    level = DEFAULT_LOG_LEVEL if level is None else level
    if logger.level == logging.NOTSET or level < logger.level:
        logger.setLevel(level)
    return level


def log_to_console(
    level: int | None = None,
    style: Literal["elapsed", "std"] = "elapsed",
    stream=None,
) -> logging.Logger:
    """
    Send lagdex log messages to the console.

    Repeated calls adjust the level of the existing handler instead of
    adding another one.  Messages go to standard error by default, keeping
    standard output free for command results.
    """
    level = _lower_level(level)
    fmt = CONSOLE_LOG_FORMAT[style]
    for handler in logger.handlers:
        if type(handler) is logging.StreamHandler and handler.formatter._fmt == fmt:
            handler.setLevel(min(level, handler.level))
            return logger
    handler = logging.StreamHandler(stream=stream or sys.stderr)
    handler.setLevel(level)
    handler.setFormatter(ElapsedTimeFormatter(fmt, style="{"))
    logger.addHandler(handler)
    return logger


def log_to_file(filename, level: int | None = None) -> logging.Logger:
    level = _lower_level(level)
    target = str(filename)
    if any(
        isinstance(h, logging.FileHandler) and h.baseFilename == target
        for h in logger.handlers
    ):
        return logger
    handler = logging.FileHandler(target)
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(FILE_LOG_FORMAT))
    logger.addHandler(handler)
    return logger


class TimingLog:
    """
    Context manager logging the duration of a long operation.

    Examples
    --------
    >>> with TimingLog("search") as timer:
    ...     first_half()
    ...     timer.split("first half")
    ...     second_half()
    """

    def __init__(self, label: str = "", log: logging.Logger | None = None, level=20):
        self.label = label
        self.log = log if log is not None else logger
        self.level = level
        self.start_time = 0.0
        self.split_time: float | None = None

    def _emit(self, tag: str, note: str, since: float) -> None:
        elapsed = timesize_stack(time.perf_counter() - since)
        self.log.log(self.level, "%s %s%s <%s>", tag, self.label, note, elapsed)

    def __enter__(self):
        self.start_time = time.perf_counter()
        self.log.log(self.level, "<BEGIN> %s", self.label)
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        if self.split_time is not None:
            self._emit("<SPLIT>", " / Final", self.split_time)
        self._emit("<-END->" if exc_type is None else "<ERROR>", "", self.start_time)

    def split(self, note: str = ""):
        since = self.start_time if self.split_time is None else self.split_time
        self._emit("<SPLIT>", f" / {note}" if note else "", since)
        self.split_time = time.perf_counter()


class ElapsedTimeFormatter(logging.Formatter):
    """Prefix records with the time since logging started."""

    def format(self, record):
        minutes, seconds = divmod(record.relativeCreated / 1000, 60)
        hours, minutes = divmod(int(minutes), 60)
        clock = f"{minutes:0>2}:{seconds:05.2f}"
        record.elapsedTime = f"{hours:0>2}:{clock}" if hours else clock
        return super().format(record)
