"""Causal graph dynamics: port graphs rewritten synchronously by local rules."""

__version__ = "0.1.0"
