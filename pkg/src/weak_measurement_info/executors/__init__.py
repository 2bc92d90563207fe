"""Executor implementations for trajectory sampling."""

from .aer import AerExecutor
from .base import BaseExecutor
from .numpy_executor import NumpyExecutor

__all__ = [
    "AerExecutor",
    "BaseExecutor",
    "NumpyExecutor",
]
