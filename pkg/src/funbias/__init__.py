"""Bias-reduced kernel estimators for scalar-on-function models."""

__version__ = "0.1.0"
