"""Exceptions raised by prosokit."""

from pathlib import Path


class ProsokitError(Exception):
    """Base class of every error raised by the package."""


class ConfigurationError(ProsokitError, ValueError):
    """Invalid analysis, reconstruction or augmentation settings."""


class UnsupportedFormatError(ProsokitError):
    """Audio container or encoding that cannot be handled.

    Parameters
    ----------
    field : str
        Name of the offending header field (e.g. ``bits_per_sample``).
    message : str
        Human readable description.
    """

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{message} (field: {field})")
        self.field = field


class FormatError(ProsokitError, ValueError):
    """Malformed text input (transcripts, CTM files, Kaldi maps, archives)."""

    def __init__(self, message: str, path: str | Path | None = None, line: int | None = None):
        location = ""
        if path is not None:
            location = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{location}{message}")
        self.path = path
        self.line = line


class DataDirError(ProsokitError):
    """Inconsistent Kaldi data directory.

    Parameters
    ----------
    root : Path
        Data directory that failed validation.
    problems : list[str]
        Every problem found, one entry each.
    """

    def __init__(self, root: Path, problems: list[str]) -> None:
        listing = "\n  ".join(problems)
        super().__init__(f"Invalid data directory '{root}':\n  {listing}")
        self.root = root
        self.problems = problems


class DegenerateInputError(ProsokitError, ValueError):
    """Input for which an operation has no meaningful output."""


class UndefinedMetricError(ProsokitError, ArithmeticError):
    """Ratio or mean whose denominator is zero."""


class ShapeMismatchError(ProsokitError, ValueError):
    """Spectrograms or matrices with incompatible shapes."""
