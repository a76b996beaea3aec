"""Transcript token handling, spelling normalization and partial-word noise."""
