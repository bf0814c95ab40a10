"""Batch scripts over the bundled rule files."""
