"""Entanglement-free evolution laboratory: bipartite dynamics and continuum regimes."""

from ._entfree import *  # noqa: F401,F403
from ._entfree import ConfigError, IoError, PreconditionError  # noqa: F401

__version__ = "0.1.0"
