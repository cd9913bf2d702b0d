"""Utility functions for atomic output, logging, and result formatting."""
