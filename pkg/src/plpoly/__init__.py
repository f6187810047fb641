"""Polyhedral projection and convex hull via parametric linear programming."""
__version__ = "0.1.0"
