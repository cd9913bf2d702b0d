"""Zipf fits, lexicon drift and stylometry."""
