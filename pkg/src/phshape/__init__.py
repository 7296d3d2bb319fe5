"""Persistent homology of ball unions: P.H. points, dimension fits and random polymers."""

__version__ = "0.1.0"
