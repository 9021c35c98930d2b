"""Distributed multi-agent coverage control: Lloyd baseline and cut-in protocol."""

__version__ = "0.1.0"
