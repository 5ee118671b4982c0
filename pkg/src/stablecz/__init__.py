"""Calderon-Zygmund analysis of stable-process martingale transforms."""

from .density import StableSpec, get_profile
from .fields import Geometry, SampledField
from .symbols import MatrixSymbol, get_symbol

__version__ = "0.1.0"

__all__ = ["StableSpec", "get_profile", "Geometry", "SampledField",
           "MatrixSymbol", "get_symbol", "__version__"]
