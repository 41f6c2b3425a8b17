"""Exact arithmetic toolkit for the gap m^2 - p^k of Eulerian-form odd perfect number candidates."""

__version__ = "0.1.0"
