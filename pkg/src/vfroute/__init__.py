"""Function-constrained routing over time-varying satellite network snapshots."""

__version__ = "0.1.0"
