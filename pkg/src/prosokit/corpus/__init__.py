"""Kaldi data directories and corpus statistics."""
