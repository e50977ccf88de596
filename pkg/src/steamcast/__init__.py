"""Hybrid quantum-classical forecasting toolkit for plant-style time series."""

from .backend import backend_name

__version__ = "0.1.0"
__all__ = ["backend_name", "__version__"]
