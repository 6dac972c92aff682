"""Alternated training with synthetic and authentic data, at desk scale."""

__version__ = "0.1.0"
