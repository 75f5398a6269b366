"""Soliton lab - numerical laboratory for the derivative NLS equation with a quintic term."""

__version__ = "0.1.0"
