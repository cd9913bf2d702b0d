"""Frequency tables, ranking and kernel lexicons."""
