"""Exact tools for finite concurrent stochastic games with prefix-independent objectives."""

from .core import *  # noqa: F401,F403
from .matgame import *  # noqa: F401,F403
from .valuation import *  # noqa: F401,F403
from .strategies import *  # noqa: F401,F403
from .transform import *  # noqa: F401,F403
from .verify import *  # noqa: F401,F403
from .sim import *  # noqa: F401,F403
from .formats import *  # noqa: F401,F403
from .corpus import *  # noqa: F401,F403

__version__ = "0.1.0"
