"""Unit test package for prosokit."""
