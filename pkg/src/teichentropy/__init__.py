"""Rauzy-Veech-Zorich induction, zippered rectangles, the symbolic coding of
the Teichmueller flow and entropy solvers for suspension flows."""
from .entropy import *  # noqa: F401,F403
from .errors import *  # noqa: F401,F403
from .induction import *  # noqa: F401,F403
from .montecarlo import *  # noqa: F401,F403
from .rauzy import *  # noqa: F401,F403
from .symbolic import *  # noqa: F401,F403
from .zippered import *  # noqa: F401,F403

__version__ = "0.1.0"
