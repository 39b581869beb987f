from __future__ import annotations

import logging
import time

from rich.console import Console
from rich.progress import Progress

logger = logging.getLogger("lagdex.progress")


class DummyProgressBar:
    """Stand-in used when progress display is switched off."""

    def __enter__(self) -> DummyProgressBar:
        return self

    def __exit__(self, *exc_info) -> None:
        return None

    def tick(self, refresh=False) -> None:
        return None


class ProgressBar:
    """
    A transient rich progress bar on standard error.

    Parameters
    ----------
    label : str
        Text shown beside the bar and in the closing log message.
    total : int
        Number of ticks expected.
    refresh_per_second : int
        Upper bound on redraws per second.
    """

    def __init__(self, label="end months", total=100, refresh_per_second=10):
        self.label = label
        self.min_interval = 1.0 / refresh_per_second
        self._last_draw = 0.0
        self._started = 0.0
        self.progress = Progress(transient=True, console=Console(stderr=True))
        self.task = self.progress.add_task(label, total=total)

    def __enter__(self) -> ProgressBar:
        self.progress.start()
        self._started = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        self.progress.stop()
        if exc_type is None:
            outcome = "completed"
        elif exc_type is KeyboardInterrupt:
            outcome = "aborted"
        else:
            outcome = "errored"
        elapsed = time.perf_counter() - self._started
        logger.info("%s %s after %.2f seconds", self.label, outcome, elapsed)

    def tick(self, refresh=False) -> None:
        """Advance the bar by one end month."""
        self.progress.advance(self.task)
        now = time.perf_counter()
        if refresh or now - self._last_draw > self.min_interval:
            self._last_draw = now
            self.progress.refresh()


def progress_bar(label: str, total: int, show: bool = True):
    if show:
        return ProgressBar(label, total)
    return DummyProgressBar()
