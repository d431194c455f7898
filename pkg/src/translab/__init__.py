"""Discrete translation-series laboratory: dyadic sets, type criteria and witnesses."""

from .dyadic import DyadicRational
from .sets import Block, CountVector, LambdaSpec, Window, count_cells, enumerate_set

__version__ = "0.1.0"

__all__ = ["DyadicRational", "Block", "CountVector", "LambdaSpec", "Window", "count_cells", "enumerate_set"]
