"""Online block coordinate descent for time-varying convex costs."""

__version__ = "0.1.0"
