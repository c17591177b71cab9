"""LiQUAR - online learning of prices and service capacity for a single-server queue."""

__version__ = "0.1.0"
