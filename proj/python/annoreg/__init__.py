"""Annotation transfer, tiling and evaluation for registered slide pairs."""

from ._annoreg import *  # noqa: F401,F403
from ._annoreg import __version__  # noqa: F401
