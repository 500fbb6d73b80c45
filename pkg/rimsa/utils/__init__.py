"""Shared utilities: logging, randomness, metrics."""
