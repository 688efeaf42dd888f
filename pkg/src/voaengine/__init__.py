"""Symbolic super vertex algebra engine over exact scalars."""

__version__ = "0.1.0"
