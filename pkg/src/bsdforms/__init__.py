"""Exact truncated power series engine for embeddings between matrix quadric models."""

__version__ = "0.1.0"
