"""Tendon-driven leg simulation and stiffness-sweep learning experiments."""

from ._core import BACKEND, available_backends

__version__ = "0.1.0"
__all__ = ["BACKEND", "available_backends", "__version__"]
