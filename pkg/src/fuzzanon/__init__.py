"""Fuzzy (phi-)k-anonymity measurement and budgeted anonymization of networks."""

__version__ = "0.1.0"
