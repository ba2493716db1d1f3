"""PAC-Bayes generalization bounds with gradient-norm complexity terms.

The heavy lifting lives in the compiled ``_core`` extension; this package
re-exports its public surface.
"""

from lsbound._core import *  # noqa: F401,F403
from lsbound._core import __version__, rng_name  # noqa: F401
