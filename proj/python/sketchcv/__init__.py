"""Control-variate and maximum-likelihood estimators for sketched inner products and traces."""

from ._core import *  # noqa: F401,F403
from ._core import SketchcvError

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
