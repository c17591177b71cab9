"""Utility functions and helpers: configuration, console/logging, error types."""
