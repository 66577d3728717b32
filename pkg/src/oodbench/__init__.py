"""Benchmark harness for runtime safety monitors guarding image classifiers."""

__version__ = "0.1.0"
