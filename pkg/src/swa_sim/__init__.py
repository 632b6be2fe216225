"""Socially weighted congestion-game simulator."""

__version__ = "0.1.0"
