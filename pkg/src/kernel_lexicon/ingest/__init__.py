"""Corpus readers, tokenization and the random-text generator."""
