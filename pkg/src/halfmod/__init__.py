"""Desk-scale experiments on nonzero coefficients of modular forms mod l."""

__version__ = "0.1.0"
