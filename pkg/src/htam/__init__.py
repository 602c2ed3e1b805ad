"""Hierarchical multi-agent tool planning and plan evaluation."""

__version__ = "0.1.0"
