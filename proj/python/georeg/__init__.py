"""Global registration toolkit for locally consistent 2D landmark maps."""

from ._georeg import *  # noqa: F401,F403
from ._georeg import __version__  # noqa: F401
