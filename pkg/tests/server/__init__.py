"""Server unit tests."""
