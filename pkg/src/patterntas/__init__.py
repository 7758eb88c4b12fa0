"""Error-resilient tile assembly systems for recursively defined patterns."""

__version__ = "0.1.0"
