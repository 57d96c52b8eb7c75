"""Discrete Schrodinger operators H = -Delta + q on the integer lattice and DNLS standing waves."""

from ._dnls import *  # noqa: F401,F403
from ._dnls import __doc__  # noqa: F401

__version__ = "0.1.0"
