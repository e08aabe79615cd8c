"""Learning-to-defer with expert-conditioned advice acquisition."""

from ._defadv import *  # noqa: F401,F403
from ._defadv import __doc__ as _core_doc

__all__ = [name for name in dir() if not name.startswith("_")]
__doc__ = _core_doc
