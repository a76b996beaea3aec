"""Decorators."""

from prosokit.decorators.log import log_stage

__all__ = ["log_stage"]
