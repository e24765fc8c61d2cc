"""Topic-heterogeneous benchmark construction and evaluation for authorship verification."""

__version__ = "0.1.0"
