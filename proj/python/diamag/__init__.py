"""Simulator and analysis toolkit for lock-in CW-ODMR diamond magnetometry.

The compiled extension carries all functionality; this package simply
re-exports it.
"""

from ._diamag import *  # noqa: F401,F403
from ._diamag import __doc__  # noqa: F401

__version__ = "0.1.0"
