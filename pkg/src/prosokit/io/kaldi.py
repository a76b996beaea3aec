"""Readers and writers for Kaldi text formats.

Covers the key/value tables of a data directory (``wav.scp``, ``text``, ``utt2spk``,
``segments``, ``spk2group``...) and text matrix archives::

    utt-id  [
      1.0 2.0 3.0
      4.0 5.0 6.0 ]
"""

import logging
from collections.abc import Iterable, Iterator, Mapping, Sequence
from pathlib import Path

import numpy as np
import numpy.typing as npt

from prosokit.errors import FormatError
from prosokit.io.filesfolders import open_file

logger = logging.getLogger(__name__)


def iter_table(path: Path, min_fields: int = 1) -> Iterator[tuple[int, str, list[str]]]:
    """Yield ``(line_number, key, fields)`` for every non-blank line of a Kaldi table.

    Parameters
    ----------
    path : Path
        Table file.
    min_fields : int, optional
        Minimum number of fields after the key, by default 1.

    Yields
    ------
    tuple[int, str, list[str]]
        Line number (1-based), key and remaining whitespace separated fields.

    Raises
    ------
    FormatError
        If a line has fewer fields than `min_fields`.
    """
    with open_file(path, "r") as f:
        for number, line in enumerate(f, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) - 1 < min_fields:
                error_msg = f"expected at least {min_fields} field(s) after '{parts[0]}'"
                raise FormatError(error_msg, path, number)
            yield number, parts[0], parts[1:]


def read_table(path: Path, min_fields: int = 1) -> dict[str, list[str]]:
    """Read a Kaldi table into a dictionary, rejecting duplicated keys.

    Parameters
    ----------
    path : Path
        Table file.
    min_fields : int, optional
        Minimum number of fields after the key, by default 1.

    Returns
    -------
    dict[str, list[str]]
        Key to fields, in file order.

    Raises
    ------
    FormatError
        On duplicated keys or short lines.
    """
    table: dict[str, list[str]] = {}
    for number, key, fields in iter_table(path, min_fields):
        if key in table:
            error_msg = f"duplicate id '{key}'"
            logger.error("%s in %s", error_msg, path)
            raise FormatError(error_msg, path, number)
        table[key] = fields
    return table


def read_scalar_table(path: Path) -> dict[str, str]:
    """Read a table whose value is a single field (``utt2spk``, ``spk2group``).

    Values spanning several fields (e.g. ``wav.scp`` paths with spaces) are joined back.
    """
    return {key: " ".join(fields) for key, fields in read_table(path).items()}


def read_transcripts(path: Path) -> dict[str, list[str]]:
    """Read a Kaldi ``text`` file: ``utt-id token token ...``.

    Utterances with an empty transcript are kept with an empty token list.

    Parameters
    ----------
    path : Path
        Transcript file.

    Returns
    -------
    dict[str, list[str]]
        Utterance id to tokens.

    Raises
    ------
    FormatError
        If an utterance id appears twice.
    """
    return read_table(path, min_fields=0)


def write_table(path: Path, table: Mapping[str, str | Sequence[str]]) -> None:
    """Write a Kaldi table sorted by key.

    Parameters
    ----------
    path : Path
        Output file; its folder is created when missing.
    table : Mapping[str, str | Sequence[str]]
        Key to value. Sequences are joined with single spaces.
    """
    with open_file(path, "w") as f:
        for key in sorted(table):
            value = table[key]
            text = value if isinstance(value, str) else " ".join(value)
            f.write(f"{key} {text}\n" if text else f"{key}\n")


def read_matrix_archive(path: Path) -> Iterator[tuple[str, npt.NDArray[np.float64]]]:
    """Yield ``(key, matrix)`` pairs from a Kaldi text archive.

    Parameters
    ----------
    path : Path
        Archive written by ``copy-feats ark:... ark,t:...`` or :func:`write_matrix_archive`.

    Yields
    ------
    tuple[str, NDArray[np.float64]]
        Utterance id and a ``rows x columns`` matrix.

    Raises
    ------
    FormatError
        On unterminated matrices, ragged rows or non numeric values.
    """
    key: str | None = None
    rows: list[list[float]] = []
    start_line = 0
    with open_file(path, "r") as f:
        for number, line in enumerate(f, start=1):
            parts = line.split()
            if not parts:
                continue
            if key is None:
                if len(parts) < 2 or parts[1] != "[":  # noqa: PLR2004
                    raise FormatError("expected 'utt-id [' to open a matrix", path, number)
                key, start_line, rows = parts[0], number, []
                parts = parts[2:]
                if not parts:
                    continue
            closing = parts[-1] == "]"
            if closing:
                parts = parts[:-1]
            if parts:
                try:
                    rows.append([float(value) for value in parts])
                except ValueError as err:
                    raise FormatError(f"non numeric value in '{key}'", path, number) from err
            if closing:
                yield key, _stack_rows(rows, key, path, start_line)
                key = None
    if key is not None:
        raise FormatError(f"matrix '{key}' is not terminated", path, start_line)


def _stack_rows(
    rows: list[list[float]], key: str, path: Path, line: int
) -> npt.NDArray[np.float64]:
    if not rows:
        return np.zeros((0, 0))
    widths = {len(row) for row in rows}
    if len(widths) != 1:
        raise FormatError(f"ragged rows in matrix '{key}'", path, line)
    return np.asarray(rows, dtype=np.float64)


def write_matrix_archive(
    path: Path, matrices: Iterable[tuple[str, npt.NDArray[np.float64]]]
) -> None:
    """Write ``(key, matrix)`` pairs as a Kaldi text archive.

    Parameters
    ----------
    path : Path
        Output archive.
    matrices : Iterable[tuple[str, NDArray[np.float64]]]
        Pairs written in the given order.
    """
    with open_file(path, "w") as f:
        for key, matrix in matrices:
            f.write(f"{key}  [\n")
            for index, row in enumerate(matrix):
                values = " ".join(f"{value:.10g}" for value in row)
                ending = " ]" if index == len(matrix) - 1 else ""
                f.write(f"  {values}{ending}\n")
            if len(matrix) == 0:
                f.write("  ]\n")
