"""Test package for weak-measurement-info."""
