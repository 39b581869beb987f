from ._app import app
from .compare import compare
from .fetch import fetch
from .fit import fit
from .info import info
from .ledger import ledger
from .search import search
from .signal import signal
from .synth import synth
from .trend import trend
