"""Manipulation and price reversion in AMM-based prediction markets."""

__version__ = "0.1.0"
