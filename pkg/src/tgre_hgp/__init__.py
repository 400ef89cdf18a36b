"""TGRE-hypergraph-product quantum CSS codes."""

__version__ = "0.1.0"
