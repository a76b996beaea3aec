"""Functions related to files and folders."""

import logging
from pathlib import Path
from typing import IO, Any

logger = logging.getLogger(__name__)


def open_file(path: Path, mode: str = "w", encoding: str | None = "utf-8") -> IO[Any]:
    """Open a file, creating its parent folder first when writing.

    Parameters
    ----------
    path : Path
        The path to the file to be opened.
    mode : str, optional
        The mode in which the file is to be opened, by default 'w'.
    encoding : str | None, optional
        The encoding used for text modes, by default 'utf-8'.

    Returns
    -------
    IO[Any]
        The opened file.

    Raises
    ------
    FileNotFoundError
        If the file is opened for reading and does not exist.
    """
    try:
        return path.open(mode=mode, encoding=encoding, newline="" if "b" not in mode else None)
    except FileNotFoundError:
        if mode in {"r", "r+", "rb"}:
            raise

        folder_created = create_folder(path, includes_file=True)
        try:
            return path.open(mode=mode, encoding=encoding, newline="" if "b" not in mode else None)
        except Exception:
            if folder_created and not any(path.parent.iterdir()):
                path.parent.rmdir()
            raise


def create_folder(path: Path, includes_file: bool = False) -> bool:
    """Create the folder passed in the 'path' if it doesn't exist.

    Parameters
    ----------
    path : Path
        Path object for the folder (can also include the file)
    includes_file : bool, optional
        The path includes a file at the end, by default 'False'.

    Returns
    -------
    bool
        True if the folder was created, False otherwise.
    """
    path = path.parent if includes_file else path

    if path.exists():
        return False

    try:
        path.mkdir(parents=True, exist_ok=True)
    except PermissionError:
        logger.warning("Failed to create folder '%s': no permission", path)
        raise
    else:
        return True


def resolve_path(path: str | Path, base: Path | None = None) -> Path:
    """Resolve a path listed inside a data file.

    Kaldi tools resolve relative paths against the working directory; `base` overrides that
    when given.

    Parameters
    ----------
    path : str | Path
        Path as written in the file.
    base : Path | None, optional
        Folder for relative paths, by default the working directory.

    Returns
    -------
    Path
        Absolute path.
    """
    path = Path(path)
    if path.is_absolute():
        return path
    return ((base or Path.cwd()) / path).resolve()
