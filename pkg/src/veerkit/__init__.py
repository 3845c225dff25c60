"""Veering triangulations of punctured mapping tori and certified geometricity."""

__version__ = "0.1.0"
