"""Prosody modification by magnitude-only reconstruction."""
