"""Unit tests for kernel-lexicon."""
