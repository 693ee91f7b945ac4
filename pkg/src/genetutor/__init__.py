"""Example-tracing tutor embedded in a gene-adjacency processing service."""

__version__ = "0.1.0"
