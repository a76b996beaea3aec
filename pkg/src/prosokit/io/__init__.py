"""Input/output auxiliary functions."""
