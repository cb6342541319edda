"""Taylor-rule shock identification and panel local projections."""

__version__ = "0.1.0"
