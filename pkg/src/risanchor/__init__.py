"""Positioning with large RISs as extended anchors: channel synthesis,
anchor-line least squares and the Cramer-Rao bound of the fix."""

from ._kernels import BACKEND
from .constants import SPEED_OF_LIGHT

__version__ = "0.1.0"
__all__ = ["BACKEND", "SPEED_OF_LIGHT", "__version__"]
