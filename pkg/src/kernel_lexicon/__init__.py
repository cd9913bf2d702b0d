"""kernel-lexicon - Word-frequency statistics: Zipf regimes, lexicon drift and author style."""

__version__ = "0.1.0"
