"""Exact point counting on del Pezzo surfaces over Q and Fq(t)."""

__version__ = "0.1.0"
