"""Test suite for kernel-lexicon."""
