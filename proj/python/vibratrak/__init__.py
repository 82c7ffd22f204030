from ._vibratrak import *  # noqa: F401,F403
from ._vibratrak import __version__  # noqa: F401
