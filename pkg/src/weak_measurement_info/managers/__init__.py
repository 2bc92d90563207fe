"""Run management."""

from .run_manager import RunManager

__all__ = ["RunManager"]
