"""Penalty-stabilized closest point method-of-lines solver for surface PDEs."""

__version__ = "0.1.0"
