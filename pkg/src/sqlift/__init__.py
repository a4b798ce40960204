"""Exact q-series toolkit for twined Borcherds products of weight 1/2 data."""

__version__ = "0.1.0"
