"""Tunnelling splittings in symmetric double wells."""

from ._core import *  # noqa: F401,F403
from ._core import TunnelError, __doc__  # noqa: F401
