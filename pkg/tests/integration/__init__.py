"""Integration tests for kernel-lexicon."""
