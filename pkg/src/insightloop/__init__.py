"""Mixed-initiative insight recommendation engine for visual-analytics systems."""

__version__ = "0.1.0"
