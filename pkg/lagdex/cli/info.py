from __future__ import annotations

import platform

import numpy
import pandas
import scipy
from rich import print

from lagdex import __version__
from lagdex.cli._app import app


@app.command()
def info():
    """Show version information."""
    print(
        f"""\
[bold dark_goldenrod]lagdex[/bold dark_goldenrod] {__version__}
  Lagged consumer and producer price index models of stock prices
  Python {platform.python_version()}, numpy {numpy.__version__}, \
pandas {pandas.__version__}, scipy {scipy.__version__}
"""
    )
