"""City-scale analysis of geo-located tweets."""

__version__ = "0.1.0"
