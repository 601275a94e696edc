"""Max-entry statistics of sample correlation matrices and the tail/moment
conditions that govern their limits."""

__version__ = "0.1.0"
