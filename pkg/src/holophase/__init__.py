"""Uhlmann and Wilczek-Zee geometric phases of a four-level Hamiltonian with
two doubly degenerate levels."""

from ._backend import BACKEND
from .errors import HolophaseError
from .model import LoopPath, make_loop
from .uhlmann import Holonomy, PhaseResult, holonomy, phase

__all__ = ["BACKEND", "HolophaseError", "Holonomy", "LoopPath", "PhaseResult", "holonomy", "make_loop", "phase"]
__version__ = "0.1.0"
