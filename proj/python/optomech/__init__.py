"""Membrane-in-the-middle optomechanics: cavity bands, cooling fits, phonon-jump budgets."""

from ._optomech import *  # noqa: F401,F403
from ._optomech import __version__  # noqa: F401
