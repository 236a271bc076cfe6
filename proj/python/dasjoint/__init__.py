"""Bayesian joint modeling of longitudinal DAS28 scores and competing-risk
informative dropout.

The heavy lifting lives in the compiled extension; this package re-exports
its surface.
"""

from dasjoint._core import *  # noqa: F401,F403
from dasjoint._core import __version__  # noqa: F401
